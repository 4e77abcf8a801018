//! Unique-ergodicity checks for a weighted system.
//!
//! Both checks are finite-horizon: a verdict states what was observed up to
//! `horizon` at a given tolerance and never more.

use serde::Serialize;

use crate::cocycle::{CylinderFunction, WeightedSystem};
use crate::contraction::{self, MarkovianMatrix};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    /// The variation of `B_n ... B_{m+1} δ_v` fell below the tolerance.
    UniqueAtTolerance,
    /// `Σ ε_n` is known to diverge (declared by the caller, or stationary).
    SufficientConditionMet,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityVerdict {
    pub status: Status,
    pub trace: Vec<TracePoint>,
    pub base: usize,
    pub horizon: usize,
    pub tolerance: f64,
}

impl ErgodicityVerdict {
    pub fn final_value(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |p| p.value)
    }

    pub fn values(&self) -> Vec<f64> {
        self.trace.iter().map(|p| p.value).collect()
    }
}

fn check_range(system: &WeightedSystem, base: usize, horizon: usize) -> Result<()> {
    if base >= horizon || horizon > system.level_count() {
        return Err(invalid(format!(
            "need base < horizon <= {}, got base {base}, horizon {horizon}",
            system.level_count()
        )));
    }
    Ok(())
}

/// For every `v` in `V(base)`, iterates `f_n = B_n ... B_{base+1} δ_v` and
/// records `max_v var(f_n)` for `n = base ..= horizon`. The entry at `n` is
/// the variation over `w` of the product entry `(B_n ... B_{base+1})(w, v)`.
pub fn check_variation_condition(
    system: &WeightedSystem,
    base: usize,
    horizon: usize,
    tol: f64,
) -> Result<ErgodicityVerdict> {
    check_range(system, base, horizon)?;
    if !(tol >= 0.0) {
        return Err(invalid(format!("tolerance {tol} must be nonnegative")));
    }
    let size = system.diagram().vertex_count(base);
    let mut fs: Vec<Vec<f64>> = (0..size)
        .map(|v| (0..size).map(|w| if v == w { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut trace = Vec::with_capacity(horizon - base + 1);
    let max_var = |fs: &[Vec<f64>]| -> Result<f64> {
        fs.iter().map(|f| contraction::variation(f)).try_fold(0.0, |m, v| Ok(f64::max(m, v?)))
    };
    trace.push(TracePoint { n: base, value: max_var(&fs)? });
    for n in base + 1..=horizon {
        let b = system.markovianize(n)?;
        for f in fs.iter_mut() {
            *f = crate::linalg::mat_vec(b, f);
        }
        trace.push(TracePoint { n, value: max_var(&fs)? });
    }
    let last = trace.last().unwrap().value;
    Ok(ErgodicityVerdict {
        status: if last <= tol { Status::UniqueAtTolerance } else { Status::Inconclusive },
        trace,
        base,
        horizon,
        tolerance: tol,
    })
}

/// `ε_n = min A_n / max A_n` (0 when `A_n` has a zero entry).
pub fn series_terms(system: &WeightedSystem, horizon: usize) -> Result<Vec<f64>> {
    if horizon > system.level_count() {
        return Err(invalid(format!("horizon {horizon} beyond diagram depth {}", system.level_count())));
    }
    Ok((1..=horizon)
        .map(|n| contraction::ratio_bound(system.transition_matrix(n)).unwrap_or(0.0))
        .collect())
}

/// Partial sums of `ε_n` up to `horizon`. Divergence cannot be read off
/// finitely many terms, so the sufficient condition is reported met only
/// when the caller declares divergence or the system is stationary, and in
/// either case only if some term is positive.
pub fn check_series_condition(
    system: &WeightedSystem,
    horizon: usize,
    declared_divergent: bool,
) -> Result<ErgodicityVerdict> {
    let terms = series_terms(system, horizon)?;
    let mut sum = 0.0;
    let trace: Vec<TracePoint> = terms
        .iter()
        .enumerate()
        .map(|(i, e)| {
            sum += e;
            TracePoint { n: i + 1, value: sum }
        })
        .collect();
    let positive = sum > 0.0;
    let stationary = system.is_stationary() && terms.first().is_some_and(|e| *e > 0.0);
    let status = if positive && (declared_divergent || stationary) {
        Status::SufficientConditionMet
    } else {
        Status::Inconclusive
    };
    Ok(ErgodicityVerdict {
        status,
        trace,
        base: 0,
        horizon,
        tolerance: 0.0,
    })
}

/// `var(E_n f)` for `n = base ..= horizon`.
pub fn variation_decay(
    system: &WeightedSystem,
    f: &CylinderFunction,
    base: usize,
    horizon: usize,
) -> Result<Vec<f64>> {
    if f.depth() > base {
        return Err(invalid(format!("function depth {} exceeds base level {base}", f.depth())));
    }
    if base > horizon || horizon > system.level_count() {
        return Err(invalid(format!("need base <= horizon <= {}", system.level_count())));
    }
    let mut h = system.expectation(f, base)?;
    let mut out = Vec::with_capacity(horizon - base + 1);
    out.push(contraction::variation(&h)?);
    for n in base + 1..=horizon {
        h = crate::linalg::mat_vec(system.markovianize(n)?, &h);
        out.push(contraction::variation(&h)?);
    }
    Ok(out)
}

/// `Π_{k=base+1}^{n} (1 - ε(B_k))` for `n = base ..= horizon`.
pub fn contraction_product_bound(system: &WeightedSystem, base: usize, horizon: usize) -> Result<Vec<f64>> {
    check_range(system, base, horizon)?;
    let mut prod = 1.0;
    let mut out = vec![prod];
    for n in base + 1..=horizon {
        let b = MarkovianMatrix::new(system.markovianize(n)?.clone())?;
        prod *= 1.0 - contraction::contraction_epsilon(&b);
        out.push(prod);
    }
    Ok(out)
}
