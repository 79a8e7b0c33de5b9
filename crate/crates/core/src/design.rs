//! Approximate designs, design spaces and discrete priors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ParamVector};

/// Support points closer than this are considered duplicates.
pub const DUPLICATE_TOL: f64 = 1e-9;
/// Tolerance on `Σ weights = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The covariate interval `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub lower: f64,
    pub upper: f64,
}

impl DesignSpace {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0 && lower < upper && upper.is_finite()) {
            return Err(Error::InvalidDesign(format!(
                "design space [{lower}, {upper}] must satisfy 0 ≤ lower < upper"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `[0, upper]`, the space used by every model here.
    pub fn up_to(upper: f64) -> Result<Self> {
        Self::new(0.0, upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// `n` equally spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        linspace(self.lower, self.upper, n)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// A finitely supported probability measure on the design space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Design {
    /// Validated constructor: points strictly increasing (gaps above
    /// [`DUPLICATE_TOL`]), weights in `(0, 1]` summing to one.
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDesign("design has no support points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidDesign(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDesign(format!(
                "non-finite support point {x}"
            )));
        }
        for pair in points.windows(2) {
            if !(pair[1] - pair[0] > DUPLICATE_TOL) {
                return Err(Error::InvalidDesign(format!(
                    "support points must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && **w <= 1.0)) {
            return Err(Error::InvalidDesign(format!("weight {w} outside (0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDesign(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { points, weights })
    }

    /// Equal weights on the given points.
    pub fn equal_weights(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Sorts the points and merges those closer than [`DUPLICATE_TOL`],
    /// summing their weights. Intended for optimizer output.
    pub fn from_unsorted(points: &[f64], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidDesign(
                "points/weights length mismatch".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .zip(weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged.last_mut() {
                Some(last) if (x - last.0).abs() <= DUPLICATE_TOL => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let (p, w) = merged.into_iter().unzip();
        Self::new(p, w)
    }

    /// `α ξ1 + (1 − α) ξ2`.
    pub fn mixture(&self, other: &Design, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidDesign(format!(
                "mixture weight {alpha} outside (0, 1)"
            )));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| alpha * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - alpha) * w));
        Self::from_unsorted(&points, &weights)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// True when the design has `n` points carrying equal weight.
    pub fn is_saturated_equal(&self, n: usize) -> bool {
        self.len() == n
            && self
                .weights
                .iter()
                .all(|w| (w - 1.0 / n as f64).abs() < 1e-12)
    }

    pub fn check_within(&self, space: &DesignSpace) -> Result<()> {
        match self.points.iter().find(|x| !space.contains(**x)) {
            Some(x) => Err(Error::InvalidDesign(format!(
                "support point {x} outside [{}, {}]",
                space.lower, space.upper
            ))),
            None => Ok(()),
        }
    }
}

/// Equal-weight design on `p + 1` points.
pub fn saturated_design(points: &[f64], n_params: usize, space: &DesignSpace) -> Result<Design> {
    if points.len() != n_params {
        return Err(Error::InvalidDesign(format!(
            "saturated design needs {n_params} points, got {}",
            points.len()
        )));
    }
    let d = Design::equal_weights(points.to_vec())?;
    d.check_within(space)?;
    Ok(d)
}

/// Discrete prior on the error-variance ratio `ρ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPrior {
    atoms: Vec<(f64, f64)>,
}

impl RatioPrior {
    /// Atoms are `(ρ², weight)` pairs.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPrior("ratio prior has no atoms".into()));
        }
        if let Some((r, _)) = atoms.iter().find(|(r, _)| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidPrior(format!(
                "ratio atom ρ² = {r} must be ≥ 0"
            )));
        }
        check_weights(atoms.iter().map(|a| a.1), "ratio prior")?;
        Ok(Self { atoms })
    }

    pub fn point(rho_sq: f64) -> Result<Self> {
        Self::new(vec![(rho_sq, 1.0)])
    }

    /// Equal weights on the given ratios.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        let w = 1.0 / values.len().max(1) as f64;
        Self::new(values.iter().map(|r| (*r, w)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

fn check_weights(weights: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut total = 0.0;
    for w in weights {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidPrior(format!(
                "{what}: weight {w} must be positive"
            )));
        }
        total += w;
    }
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidPrior(format!(
            "{what}: weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Weighted finite set of parameter vectors, optionally joint with a prior
/// on `ρ²`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePrior {
    atoms: Vec<(ParamVector, f64)>,
    rho_atoms: Option<RatioPrior>,
}

impl DiscretePrior {
    pub fn new(atoms: Vec<(ParamVector, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPrior("prior has no atoms".into()));
        }
        let len = atoms[0].0.len();
        if atoms.iter().any(|(t, _)| t.len() != len) {
            return Err(Error::InvalidPrior("atoms of differing dimension".into()));
        }
        check_weights(atoms.iter().map(|a| a.1), "parameter prior")?;
        Ok(Self {
            atoms,
            rho_atoms: None,
        })
    }

    pub fn point(theta: ParamVector) -> Self {
        Self {
            atoms: vec![(theta, 1.0)],
            rho_atoms: None,
        }
    }

    pub fn with_ratio_prior(mut self, rho: RatioPrior) -> Self {
        self.rho_atoms = Some(rho);
        self
    }

    pub fn atoms(&self) -> &[(ParamVector, f64)] {
        &self.atoms
    }

    pub fn rho_atoms(&self) -> Option<&RatioPrior> {
        self.rho_atoms.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.len()
    }

    /// Verifies every atom against the model's parameter constraints.
    pub fn check_model(&self, model: ModelKind) -> Result<()> {
        for (i, (theta, _)) in self.atoms.iter().enumerate() {
            model
                .check_params(theta)
                .map_err(|e| Error::InvalidPrior(format!("atom {i}: {e}")))?;
        }
        Ok(())
    }
}

/// Cartesian product of equally spaced grids, one per parameter interval,
/// with uniform weights.
///
/// A degenerate interval `lo == hi` contributes its single value whatever
/// `nu` is.
pub fn uniform_grid_prior(intervals: &[(f64, f64)], nu: usize) -> Result<DiscretePrior> {
    if intervals.is_empty() {
        return Err(Error::InvalidPrior("no parameter intervals".into()));
    }
    if nu == 0 {
        return Err(Error::InvalidPrior("ν must be at least 1".into()));
    }
    let mut axes = Vec::with_capacity(intervals.len());
    for (i, &(lo, hi)) in intervals.iter().enumerate() {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidPrior(format!(
                "interval {i}: [{lo}, {hi}] is empty"
            )));
        }
        if lo == hi {
            axes.push(vec![lo]);
        } else if nu == 1 {
            return Err(Error::InvalidPrior(format!(
                "interval {i}: ν = 1 is ambiguous for a non-degenerate interval [{lo}, {hi}]"
            )));
        } else {
            axes.push(linspace(lo, hi, nu));
        }
    }
    let total: usize = axes.iter().map(Vec::len).product();
    let weight = 1.0 / total as f64;
    let mut atoms = Vec::with_capacity(total);
    let mut index = vec![0usize; axes.len()];
    for _ in 0..total {
        let values: Vec<f64> = index.iter().zip(&axes).map(|(&k, ax)| ax[k]).collect();
        atoms.push((ParamVector::new(&values)?, weight));
        // odometer, last axis fastest
        for d in (0..axes.len()).rev() {
            index[d] += 1;
            if index[d] < axes[d].len() {
                break;
            }
            index[d] = 0;
        }
    }
    // weight * total can miss 1 by an ulp or two
    DiscretePrior::new(atoms)
}
