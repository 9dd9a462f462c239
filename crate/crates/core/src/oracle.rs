//! Brute-force Fock-state simulation of the polarizing-beam-splitter
//! ring followed by per-mode half-wave plates.
//!
//! This is the ground truth for [`crate::ghz`]: input product states are
//! expanded photon by photon through the analyzer's mode transform,
//! amplitudes are accumulated per output occupation, and a threshold
//! detector model with efficiency `eta_d` and dark-count probability
//! `p_d` is applied on top. Nothing here shares code with the closed
//! forms.
//!
//! Phase convention: a vertical photon from party `i` exits in spatial
//! mode `i + 1` carrying sign -1 from its two reflections; the
//! wrap-around path (last party into mode 1) is phase-compensated to +1.
//! Only the product of the vertical-path phases is observable, through
//! the interference of the two uniform input patterns, and this
//! convention reproduces the parity table of [`crate::ghz::classify_parity`].

use crate::error::{QssError, Result};
use crate::ghz::{classify_parity, GhzProjection};
use num_complex::Complex64;
use std::collections::HashMap;

/// Largest party count the exhaustive statistics accept.
pub const MAX_ORACLE_PARTIES: u32 = 5;

/// Single-photon polarization state entering the analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputState {
    H,
    V,
    Plus,
    Minus,
}

/// Measurement basis for [`oracle_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

/// Unitary acting on the 2n optical modes (n spatial x 2 polarizations).
///
/// Mode index `2 * spatial + pol` with pol 0 = H, 1 = V.
#[derive(Debug, Clone)]
pub struct ModeTransform {
    n_parties: usize,
    matrix: Vec<Complex64>,
}

impl ModeTransform {
    pub fn dimension(&self) -> usize {
        2 * self.n_parties
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dimension() + col]
    }

    /// Largest entry of `U U^dagger - I` in absolute value.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dimension();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(i, k) * self.entry(j, k).conj();
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Compose the beam-splitter ring with the half-wave plates.
pub fn build_analyzer_transform(n: u32) -> Result<ModeTransform> {
    if !(3..=6).contains(&n) {
        return Err(QssError::domain(format!(
            "analyzer transform supports 3..=6 parties, got {n}"
        )));
    }
    let n = n as usize;
    let d = 2 * n;
    let mut pbs = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..n {
        // H transmits into spatial mode i
        pbs[(2 * i) * d + 2 * i] = Complex64::new(1.0, 0.0);
        // V reflects into spatial mode i+1 (mod n)
        let sign = if i == n - 1 { 1.0 } else { -1.0 };
        let row = 2 * ((i + 1) % n) + 1;
        pbs[row * d + 2 * i + 1] = Complex64::new(sign, 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut hwp = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..n {
        let (h, v) = (2 * j, 2 * j + 1);
        hwp[h * d + h] = Complex64::new(s, 0.0);
        hwp[v * d + h] = Complex64::new(s, 0.0);
        hwp[h * d + v] = Complex64::new(s, 0.0);
        hwp[v * d + v] = Complex64::new(-s, 0.0);
    }
    let mut matrix = vec![Complex64::new(0.0, 0.0); d * d];
    for row in 0..d {
        for col in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += hwp[row * d + k] * pbs[k * d + col];
            }
            matrix[row * d + col] = acc;
        }
    }
    Ok(ModeTransform {
        n_parties: n,
        matrix,
    })
}

/// Photon counts per output mode, two bits per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occupation(u64);

impl Occupation {
    pub fn count(&self, mode: usize) -> u32 {
        ((self.0 >> (2 * mode)) & 0b11) as u32
    }

    fn bump(&self, mode: usize) -> Option<Occupation> {
        if self.count(mode) >= 2 {
            return None; // more than two photons per detector never occurs here
        }
        Some(Occupation(self.0 + (1 << (2 * mode))))
    }

    fn multiplicity(&self, dim: usize) -> f64 {
        let mut m = 1.0;
        for mode in 0..dim {
            if self.count(mode) == 2 {
                m *= 2.0;
            }
        }
        m
    }
}

/// Exact output probabilities over detector-mode occupations.
#[derive(Debug, Clone)]
pub struct OutputDistribution {
    pub entries: Vec<(Occupation, f64)>,
}

impl OutputDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

fn input_branches(state: InputState) -> Vec<(usize, Complex64)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match state {
        InputState::H => vec![(0, Complex64::new(1.0, 0.0))],
        InputState::V => vec![(1, Complex64::new(1.0, 0.0))],
        InputState::Plus => vec![(0, Complex64::new(s, 0.0)), (1, Complex64::new(s, 0.0))],
        InputState::Minus => vec![(0, Complex64::new(s, 0.0)), (1, Complex64::new(-s, 0.0))],
    }
}

/// Propagate one photon per party through the transform and collect the
/// exact occupation distribution.
pub fn output_distribution(
    pattern: &[InputState],
    transform: &ModeTransform,
) -> Result<OutputDistribution> {
    let n = transform.n_parties();
    if pattern.len() != n {
        return Err(QssError::domain(format!(
            "pattern length {} does not match {n} parties",
            pattern.len()
        )));
    }
    let d = transform.dimension();
    let mut amplitudes: HashMap<Occupation, Complex64> = HashMap::new();
    // depth-first expansion over (input branch, output mode) per photon
    let mut stack: Vec<(usize, Occupation, Complex64)> =
        vec![(0, Occupation(0), Complex64::new(1.0, 0.0))];
    while let Some((party, occ, amp)) = stack.pop() {
        if party == n {
            *amplitudes.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
            continue;
        }
        for (pol, coeff) in input_branches(pattern[party]) {
            let col = 2 * party + pol;
            for row in 0..d {
                let u = transform.entry(row, col);
                if u.norm_sqr() == 0.0 {
                    continue;
                }
                if let Some(next) = occ.bump(row) {
                    stack.push((party + 1, next, amp * coeff * u));
                }
            }
        }
    }
    let entries = amplitudes
        .into_iter()
        .filter_map(|(occ, amp)| {
            let p = amp.norm_sqr() * occ.multiplicity(d);
            (p > 1e-30).then_some((occ, p))
        })
        .collect();
    Ok(OutputDistribution { entries })
}

/// Joint click distribution over the 2n detectors.
#[derive(Debug, Clone)]
pub struct ClickPatternDistribution {
    /// (detector click bitmask, probability), detectors independent.
    pub entries: Vec<(u32, f64)>,
}

impl ClickPatternDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

fn detector_click_probability(photons: u32, eta_d: f64, p_d: f64) -> f64 {
    // p_d + (1 - p_d)(1 - (1 - eta_d)^c), written to stay exact for
    // tiny dark-count probabilities
    let detect = match photons {
        0 => 0.0,
        1 => eta_d,
        2 => eta_d * (2.0 - eta_d),
        c => 1.0 - (1.0 - eta_d).powi(c as i32),
    };
    p_d + (1.0 - p_d) * detect
}

/// Threshold-detector response to one occupation configuration.
pub fn detector_response(
    occ: Occupation,
    dim: usize,
    eta_d: f64,
    p_d: f64,
) -> ClickPatternDistribution {
    let click: Vec<f64> = (0..dim)
        .map(|m| detector_click_probability(occ.count(m), eta_d, p_d))
        .collect();
    let mut entries = Vec::with_capacity(1 << dim);
    for mask in 0u32..(1 << dim) {
        let mut p = 1.0;
        for (m, c) in click.iter().enumerate() {
            p *= if mask >> m & 1 == 1 { *c } else { 1.0 - c };
        }
        if p > 0.0 {
            entries.push((mask, p));
        }
    }
    ClickPatternDistribution { entries }
}

/// Dump a click-pattern distribution as CSV (bitmask, probability).
pub fn dump_click_distribution_csv(dist: &ClickPatternDistribution) -> String {
    let mut out = String::from("detector_bitmask,probability\n");
    let mut rows = dist.entries.clone();
    rows.sort_by_key(|(mask, _)| *mask);
    for (mask, p) in rows {
        out.push_str(&format!("{mask},{p:.17e}\n"));
    }
    out
}

/// Per spatial mode, probability of exactly one click and of that click
/// being the V detector, given the occupation.
fn mode_click_split(occ: Occupation, mode: usize, eta_d: f64, p_d: f64) -> (f64, f64) {
    let ph = detector_click_probability(occ.count(2 * mode), eta_d, p_d);
    let pv = detector_click_probability(occ.count(2 * mode + 1), eta_d, p_d);
    (ph * (1.0 - pv), pv * (1.0 - ph))
}

fn pattern_from_bits(n: u32, bits: u32, basis: Basis) -> Vec<InputState> {
    (0..n)
        .map(|i| match (basis, bits >> i & 1) {
            (Basis::Z, 0) => InputState::H,
            (Basis::Z, _) => InputState::V,
            (Basis::X, 0) => InputState::Plus,
            (Basis::X, _) => InputState::Minus,
        })
        .collect()
}

/// Exhaustive gain and error rate over all 2^n equiprobable inputs.
///
/// Success means exactly one click per spatial mode. In the
/// computational basis an error is a success on a non-uniform pattern;
/// in the diagonal basis it is a parity classification disagreeing with
/// the projection implied by the number of minus states.
pub fn oracle_stats(n: u32, basis: Basis, eta_d: f64, p_d: f64) -> Result<(f64, f64)> {
    if !(3..=MAX_ORACLE_PARTIES).contains(&n) {
        return Err(QssError::domain(format!(
            "oracle statistics support 3..={MAX_ORACLE_PARTIES} parties, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&eta_d) || !(0.0..=1.0).contains(&p_d) {
        return Err(QssError::invalid("eta_d and p_d must be in [0, 1]".to_string()));
    }
    let transform = build_analyzer_transform(n)?;
    let mut gain = 0.0;
    let mut error = 0.0;
    for bits in 0u32..(1 << n) {
        let pattern = pattern_from_bits(n, bits, basis);
        let dist = output_distribution(&pattern, &transform)?;
        for (occ, p_occ) in &dist.entries {
            // parity-resolved probability of one click in every mode
            let mut even = 1.0;
            let mut odd = 0.0;
            for mode in 0..n as usize {
                let (ph, pv) = mode_click_split(*occ, mode, eta_d, p_d);
                let new_even = even * ph + odd * pv;
                let new_odd = odd * ph + even * pv;
                even = new_even;
                odd = new_odd;
            }
            gain += p_occ * (even + odd);
            match basis {
                Basis::Z => {
                    let uniform = bits == 0 || bits == (1 << n) - 1;
                    if !uniform {
                        error += p_occ * (even + odd);
                    }
                }
                Basis::X => {
                    let expected = if bits.count_ones() % 2 == 0 {
                        GhzProjection::PhiPlus
                    } else {
                        GhzProjection::PhiMinus
                    };
                    let label_even = classify_parity(n, 0)?;
                    let wrong = if label_even == expected { odd } else { even };
                    error += p_occ * wrong;
                }
            }
        }
    }
    let norm = 2f64.powi(-(n as i32));
    gain *= norm;
    error *= norm;
    let rate = if gain > 0.0 { error / gain } else { 0.0 };
    Ok((gain, rate))
}
