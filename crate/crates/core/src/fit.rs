//! Least-squares slopes of log-log data, with a noise floor below which points are dropped.

use alloc::vec::Vec;

use crate::math;

/// Errors below this are integrator noise and carry no convergence information.
pub const NOISE_FLOOR: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points_used: usize,
}

/// Outcome of fitting log(err) against log(x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitOutcome {
    /// Every error sat below the noise floor.
    Exact,
    /// Only one point survived the floor.
    Insufficient {
        points_used: usize,
    },
    Fitted(LinearFit),
}

impl FitOutcome {
    pub fn slope(&self) -> Option<f64> {
        match self {
            Self::Fitted(f) => Some(f.slope),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact)
    }
}

/// Ordinary least squares y = a + b x. Needs at least two distinct x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept,
        r2,
        points_used: n,
    })
}

/// Fit log(err) vs log(x), excluding errors below `floor`.
pub fn loglog_fit(xs: &[f64], errs: &[f64], floor: f64) -> FitOutcome {
    let floors: Vec<f64> = errs.iter().map(|_| floor).collect();
    loglog_fit_floors(xs, errs, &floors)
}

/// As [`loglog_fit`] with a separate noise floor per point.
pub fn loglog_fit_floors(xs: &[f64], errs: &[f64], floors: &[f64]) -> FitOutcome {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(errs)
        .zip(floors)
        .filter(|((x, e), f)| **e >= **f && e.is_finite() && **x > 0.0)
        .map(|((x, e), _)| (math::ln(*x), math::ln(*e)))
        .unzip();
    if lx.is_empty() {
        return FitOutcome::Exact;
    }
    match linear_fit(&lx, &ly) {
        Some(f) => FitOutcome::Fitted(f),
        None => FitOutcome::Insufficient { points_used: lx.len() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let es: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.0)).collect();
        let FitOutcome::Fitted(f) = loglog_fit(&xs, &es, NOISE_FLOOR) else {
            panic!()
        };
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert_eq!(f.points_used, 4);
    }

    #[test]
    fn noise_floor_exclusion() {
        let xs = [1.0, 2.0, 4.0];
        assert_eq!(loglog_fit(&xs, &[1e-13, 1e-14, 0.0], NOISE_FLOOR), FitOutcome::Exact);
        assert_eq!(
            loglog_fit(&xs, &[1e-3, 1e-14, 0.0], NOISE_FLOOR),
            FitOutcome::Insufficient { points_used: 1 }
        );
        let FitOutcome::Fitted(f) = loglog_fit(&xs, &[1e-3, 2.5e-4, 0.0], NOISE_FLOOR) else {
            panic!()
        };
        assert_eq!(f.points_used, 2);
        assert!((f.slope + 2.0).abs() < 1e-12);
    }
}
