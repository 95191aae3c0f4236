//! Discrete Floquet-Bloch transform over a sampled Brillouin zone.
//!
//! The zone is `(-Λ*/2, Λ*/2]` with `Λ* = 2π/Λ`, sampled at its `N` right
//! endpoints `α_m = -Λ*/2 + mΛ*/N`. With this choice the trapezoidal inverse is
//! exact on sequences supported in fewer than `N` cells.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform quasimomentum samples with equal trapezoidal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrillouinGrid {
    period: f64,
    dual_period: f64,
    alphas: Vec<f64>,
    weight: f64,
}

impl BrillouinGrid {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dual_period(&self) -> f64 {
        self.dual_period
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `e^{iΛ shift α_m}`, computed from the exact angle `-π shift + 2π shift m/N`.
    fn phase(&self, m: usize, shift: i64) -> Complex64 {
        let n = self.alphas.len() as i64;
        // reduce shift·(m+1) mod N before scaling so large shifts keep full accuracy
        let turns = (shift.rem_euclid(2 * n) * (m as i64 + 1)).rem_euclid(n);
        let angle = -PI * shift.rem_euclid(2) as f64 + TAU * turns as f64 / n as f64;
        Complex64::from_polar(1.0, angle)
    }
}

/// Samples `α_m = -Λ*/2 + mΛ*/N`, `m = 1..=N`, with weight `Λ*/N`.
pub fn brillouin_samples(period: f64, n: usize) -> Result<BrillouinGrid> {
    if n == 0 {
        return Err(Error::Argument("Brillouin grid needs at least one sample".into()));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Argument(format!("period must be positive, got {period}")));
    }
    let dual_period = TAU / period;
    let weight = dual_period / n as f64;
    let alphas = (1..=n).map(|m| -0.5 * dual_period + m as f64 * weight).collect();
    Ok(BrillouinGrid {
        period,
        dual_period,
        alphas,
        weight,
    })
}

/// Finitely many cell translates of a field sampled on one in-cell grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellSequence {
    samples: usize,
    values: BTreeMap<i64, Vec<Complex64>>,
}

impl CellSequence {
    pub fn new(samples: usize) -> Self {
        Self {
            samples,
            values: BTreeMap::new(),
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn insert(&mut self, shift: i64, values: Vec<Complex64>) -> Result<()> {
        if values.len() != self.samples {
            return Err(Error::Argument(format!(
                "cell {shift} has {} samples, sequence expects {}",
                values.len(),
                self.samples
            )));
        }
        self.values.insert(shift, values);
        Ok(())
    }

    pub fn get(&self, shift: i64) -> Option<&[Complex64]> {
        self.values.get(&shift).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &[Complex64])> {
        self.values.iter().map(|(&j, v)| (j, v.as_slice()))
    }

    /// Largest `|j|` in the support, `None` when empty.
    pub fn radius(&self) -> Option<i64> {
        self.values.keys().map(|j| j.abs()).max()
    }
}

/// One field per Brillouin sample, all on a shared set of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochFamily {
    grid: BrillouinGrid,
    fields: Vec<Vec<Complex64>>,
}

impl BlochFamily {
    pub fn new(grid: BrillouinGrid, fields: Vec<Vec<Complex64>>) -> Result<Self> {
        if fields.len() != grid.len() {
            return Err(Error::Argument(format!(
                "{} fields for {} quasimomenta",
                fields.len(),
                grid.len()
            )));
        }
        if let Some(first) = fields.first() {
            if fields.iter().any(|f| f.len() != first.len()) {
                return Err(Error::Argument("fields of a family must share one node set".into()));
            }
        }
        Ok(Self { grid, fields })
    }

    pub fn grid(&self) -> &BrillouinGrid {
        &self.grid
    }

    pub fn fields(&self) -> &[Vec<Complex64>] {
        &self.fields
    }

    pub fn samples(&self) -> usize {
        self.fields.first().map_or(0, Vec::len)
    }
}

/// `w(α_m, x) = (Λ/2π)^{1/2} Σ_j seq(j, x) e^{-iΛjα_m}`.
pub fn forward_bloch(seq: &CellSequence, grid: &BrillouinGrid) -> Result<BlochFamily> {
    let scale = (grid.period / TAU).sqrt();
    let fields = (0..grid.len())
        .map(|m| {
            let mut w = vec![Complex64::new(0.0, 0.0); seq.samples];
            for (j, values) in seq.iter() {
                let phase = scale * grid.phase(m, -j);
                for (out, v) in w.iter_mut().zip(values) {
                    *out += phase * v;
                }
            }
            w
        })
        .collect();
    BlochFamily::new(grid.clone(), fields)
}

/// Trapezoidal inverse on the cell shifted by `shift` periods,
/// `(Λ/2π)^{1/2} (Λ*/N) Σ_m w(α_m, x) e^{iΛ shift α_m}`.
pub fn inverse_bloch_discrete(family: &BlochFamily, shift: i64) -> Vec<Complex64> {
    let mut acc = Synthesis::new(&family.grid, &[shift], family.samples());
    for field in &family.fields {
        acc.push(field).expect("family fields share one length by construction");
    }
    acc.finish().pop().unwrap_or_default()
}

/// Ordered accumulator for the trapezoidal inverse over several cell shifts.
///
/// Fields must arrive in ascending `m`; the fixed order makes the result
/// independent of how the per-α solves were scheduled.
#[derive(Debug, Clone)]
pub struct Synthesis {
    grid: BrillouinGrid,
    shifts: Vec<i64>,
    sums: Vec<Vec<Complex64>>,
    next: usize,
}

impl Synthesis {
    pub fn new(grid: &BrillouinGrid, shifts: &[i64], samples: usize) -> Self {
        Self {
            grid: grid.clone(),
            shifts: shifts.to_vec(),
            sums: vec![vec![Complex64::new(0.0, 0.0); samples]; shifts.len()],
            next: 0,
        }
    }

    /// Index of the next expected quasimomentum sample.
    pub fn next_index(&self) -> usize {
        self.next
    }

    /// Adds the field for sample `next_index()`.
    pub fn push(&mut self, field: &[Complex64]) -> Result<()> {
        if self.next >= self.grid.len() {
            return Err(Error::Argument("all quasimomentum samples already added".into()));
        }
        for (sum, &shift) in self.sums.iter_mut().zip(&self.shifts) {
            if field.len() != sum.len() {
                return Err(Error::Argument(format!(
                    "field has {} samples, synthesis expects {}",
                    field.len(),
                    sum.len()
                )));
            }
            let phase = self.grid.phase(self.next, shift);
            for (s, v) in sum.iter_mut().zip(field) {
                *s += phase * v;
            }
        }
        self.next += 1;
        Ok(())
    }

    /// Scaled sums, one per requested shift.
    pub fn finish(self) -> Vec<Vec<Complex64>> {
        if self.next != self.grid.len() {
            log::warn!(
                "synthesis finished after {} of {} quasimomenta",
                self.next,
                self.grid.len()
            );
        }
        let scale = (self.grid.period / TAU).sqrt() * self.grid.weight;
        self.sums
            .into_iter()
            .map(|mut s| {
                s.iter_mut().for_each(|v| *v *= scale);
                s
            })
            .collect()
    }
}

/// Largest deviation of forward-then-inverse from the input over its support.
pub fn roundtrip_check(seq: &CellSequence, n: usize, period: f64) -> Result<f64> {
    let grid = brillouin_samples(period, n)?;
    let Some(radius) = seq.radius() else {
        return Ok(0.0);
    };
    if n as i64 <= 2 * radius {
        log::warn!("{n} samples alias a sequence of radius {radius}; the deviation measures aliasing");
    }
    let family = forward_bloch(seq, &grid)?;
    let mut worst = 0.0f64;
    for (j, values) in seq.iter() {
        let back = inverse_bloch_discrete(&family, j);
        for (a, b) in back.iter().zip(values) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_sequence(rng: &mut ChaCha8Rng, radius: i64, samples: usize) -> CellSequence {
        let mut seq = CellSequence::new(samples);
        for j in -radius..=radius {
            let v = (0..samples)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            seq.insert(j, v).unwrap();
        }
        seq
    }

    #[test]
    fn sample_positions() {
        let g = brillouin_samples(TAU, 4).unwrap();
        assert_eq!(g.alphas(), &[-0.25, 0.0, 0.25, 0.5]);
        assert_eq!(g.weight(), 0.25);
        let g = brillouin_samples(TAU, 1).unwrap();
        assert_eq!(g.alphas(), &[0.5]);
        assert_eq!(g.weight(), 1.0);
        let g = brillouin_samples(3.0, 7).unwrap();
        let total: f64 = g.alphas().iter().map(|_| g.weight()).sum();
        assert!((total - TAU / 3.0).abs() < 1e-14);
        for w in g.alphas().windows(2) {
            assert!((w[1] - w[0] - g.weight()).abs() < 1e-14);
        }
        assert!(brillouin_samples(TAU, 0).is_err());
    }

    #[test]
    fn phases_match_direct_evaluation() {
        let g = brillouin_samples(2.5, 9).unwrap();
        for m in 0..9 {
            for shift in [-20i64, -3, 0, 1, 7, 11] {
                let direct = Complex64::from_polar(1.0, 2.5 * shift as f64 * g.alphas()[m]);
                assert!((g.phase(m, shift) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_cell_is_alpha_independent() {
        let mut seq = CellSequence::new(2);
        seq.insert(0, vec![c(1.0, 2.0), c(-0.5, 0.0)]).unwrap();
        let period = 4.0;
        let family = forward_bloch(&seq, &brillouin_samples(period, 5).unwrap()).unwrap();
        let scale = (period / TAU).sqrt();
        for f in family.fields() {
            assert!((f[0] - scale * c(1.0, 2.0)).norm() < 1e-15);
            assert!((f[1] - scale * c(-0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn shifted_delta_has_unit_modulus() {
        let mut seq = CellSequence::new(1);
        seq.insert(1, vec![c(1.0, 0.0)]).unwrap();
        let grid = brillouin_samples(TAU, 6).unwrap();
        let family = forward_bloch(&seq, &grid).unwrap();
        for (f, &a) in family.fields().iter().zip(grid.alphas()) {
            assert!((f[0] - Complex64::from_polar(1.0, -TAU * a)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_family_inverts_to_itself() {
        let grid = brillouin_samples(TAU, 7).unwrap();
        let g = vec![c(0.3, -1.0), c(2.0, 0.5)];
        let family = BlochFamily::new(grid, vec![g.clone(); 7]).unwrap();
        let out = inverse_bloch_discrete(&family, 0);
        for (a, b) in out.iter().zip(&g) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_harmonic_selects_its_shift() {
        // Σ_n e^{iΛ(j-m)α_n} = N(-1)^{j-m} when j ≡ m (mod N), else 0
        let period = 3.0;
        let n = 5usize;
        let grid = brillouin_samples(period, n).unwrap();
        let g = c(0.7, 0.2);
        let harmonic = 2i64;
        let fields = grid
            .alphas()
            .iter()
            .map(|&a| vec![Complex64::from_polar(1.0, -period * harmonic as f64 * a) * g])
            .collect();
        let family = BlochFamily::new(grid.clone(), fields).unwrap();
        let peak = (period / TAU).sqrt() * grid.dual_period() * g;
        for shift in -8i64..=12 {
            let out = inverse_bloch_discrete(&family, shift)[0];
            let diff = shift - harmonic;
            let expected = if diff.rem_euclid(n as i64) == 0 {
                let sign = if (diff / n as i64) % 2 == 0 { 1.0 } else { -1.0 };
                peak * sign
            } else {
                c(0.0, 0.0)
            };
            assert!((out - expected).norm() < 1e-13, "shift {shift}");
        }
    }

    #[test]
    fn zero_family_and_empty_sequence() {
        let grid = brillouin_samples(TAU, 3).unwrap();
        let family = BlochFamily::new(grid, vec![vec![c(0.0, 0.0); 4]; 3]).unwrap();
        assert!(inverse_bloch_discrete(&family, 2).iter().all(|v| v.norm() == 0.0));
        assert_eq!(roundtrip_check(&CellSequence::new(4), 8, TAU).unwrap(), 0.0);
    }

    #[test]
    fn roundtrip_exact_without_aliasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seq = random_sequence(&mut rng, 3, 5);
        assert!(roundtrip_check(&seq, 16, TAU).unwrap() <= 1e-12);
        assert!(roundtrip_check(&seq, 7, 1.3).unwrap() <= 1e-12);
        // N = 2J folds j = -J onto j = J
        assert!(roundtrip_check(&seq, 6, TAU).unwrap() > 1e-3);
    }

    #[test]
    fn discrete_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let radius = rng.gen_range(0..=8i64);
            let n = rng.gen_range((2 * radius as usize + 1)..=64);
            let period = rng.gen_range(0.5..8.0);
            let seq = random_sequence(&mut rng, radius, 3);
            let grid = brillouin_samples(period, n).unwrap();
            let family = forward_bloch(&seq, &grid).unwrap();
            for x in 0..3 {
                let lhs: f64 = grid.weight() * family.fields().iter().map(|f| f[x].norm_sqr()).sum::<f64>();
                let rhs: f64 = seq.iter().map(|(_, v)| v[x].norm_sqr()).sum();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_sequence(&mut rng, 2, 4);
        let g = random_sequence(&mut rng, 2, 4);
        let (a, b) = (c(0.3, -1.2), c(-2.0, 0.7));
        let mut combo = CellSequence::new(4);
        for j in -2..=2 {
            let v = f
                .get(j)
                .unwrap()
                .iter()
                .zip(g.get(j).unwrap())
                .map(|(x, y)| a * x + b * y)
                .collect();
            combo.insert(j, v).unwrap();
        }
        let grid = brillouin_samples(TAU, 9).unwrap();
        let tf = forward_bloch(&f, &grid).unwrap();
        let tg = forward_bloch(&g, &grid).unwrap();
        let tc = forward_bloch(&combo, &grid).unwrap();
        for m in 0..9 {
            for x in 0..4 {
                let lin = a * tf.fields()[m][x] + b * tg.fields()[m][x];
                assert!((tc.fields()[m][x] - lin).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn synthesis_rejects_extra_and_mismatched_fields() {
        let grid = brillouin_samples(TAU, 1).unwrap();
        let mut acc = Synthesis::new(&grid, &[0, 1], 2);
        assert!(acc.push(&[c(1.0, 0.0)]).is_err());
        acc.push(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(acc.push(&[c(1.0, 0.0), c(0.0, 1.0)]).is_err());
        let out = acc.finish();
        assert_eq!(out.len(), 2);
    }
}
