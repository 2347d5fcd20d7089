use super::ddouble::pow_dd;
use super::skew::SkewShiftState;

/// Mod-1 sequences whose equidistribution is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    /// `n^ρ mod 1`
    NRho(f64),
    /// `nα mod 1`
    Rotation(f64),
    /// Last coordinate of the skew-shift orbit.
    SkewLast(SkewShiftState),
}

/// First `count` terms, `n = 1..=count`.
pub fn sequence(kind: &SequenceKind, count: usize) -> Vec<f64> {
    (1..=count as i64)
        .map(|n| match kind {
            SequenceKind::NRho(rho) => pow_dd(n as u64, *rho).fract(),
            SequenceKind::Rotation(alpha) => super::ddouble::DoubleDouble::from_i128(n as i128)
                .mul_f64(*alpha)
                .fract(),
            SequenceKind::SkewLast(st) => st.sample(n),
        })
        .collect()
}

/// Exact star discrepancy `sup_t |#{x_i < t}/N - t|` of points in `[0,1)`.
pub fn star_discrepancy(points: &[f64]) -> f64 {
    assert!(!points.is_empty(), "discrepancy of an empty point set");
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max)
}

/// Star discrepancy of the first `count` terms of the sequence.
pub fn discrepancy(kind: &SequenceKind, count: usize) -> f64 {
    star_discrepancy(&sequence(kind, count))
}
