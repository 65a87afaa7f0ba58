//! Closed-form capacity analysis for a single community treated as one node.
//!
//! Series entries are per-step power; all ratios are invariant to the step
//! length, so budgets here are sums over steps (multiply by the step length
//! for energy).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("community has zero total demand")]
    ZeroDemand,
    #[error("`{field}` has {got} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("`{field}`[{index}] = {value} is not a finite nonnegative number")]
    InvalidValue {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("export limit required")]
    MissingExportLimit,
    #[error("export limit present; use the constrained form")]
    UnexpectedExportLimit,
    #[error("sub-unity export regime: closed form does not apply")]
    SubUnityExportRegime,
    #[error("budget grid must be finite, nonnegative and nondecreasing")]
    InvalidBudgetGrid,
    #[error("target ratio {target} is below the baseline ratio {x0}")]
    TargetBelowBaseline { target: f64, x0: f64 },
    #[error("total demand must be positive, got {0}")]
    NonpositiveDemand(f64),
}

/// One community over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySeries {
    pub gen: Vec<f64>,
    pub load: Vec<f64>,
    pub cap_plus: Vec<f64>,
    /// Upper bound on net flexibility `S+ - S-` per step. `None` means
    /// export is unconstrained. Negative entries force net consumption.
    pub export_limit: Option<Vec<f64>>,
}

impl CommunitySeries {
    pub fn steps(&self) -> usize {
        self.load.len()
    }

    /// Total demand over the horizon.
    pub fn gamma(&self) -> f64 {
        self.load.iter().sum()
    }

    pub fn baseline_ratio(&self) -> Result<f64, AnalyticError> {
        self.check()?;
        Ok(self.gen.iter().sum::<f64>() / self.gamma())
    }

    fn check(&self) -> Result<(), AnalyticError> {
        let n = self.load.len();
        let mut fields: Vec<(&'static str, &[f64], bool)> = vec![
            ("load", &self.load, true),
            ("gen", &self.gen, true),
            ("cap_plus", &self.cap_plus, true),
        ];
        if let Some(limit) = &self.export_limit {
            fields.push(("export_limit", limit, false));
        }
        for (field, values, nonneg) in fields {
            if values.len() != n {
                return Err(AnalyticError::LengthMismatch {
                    field,
                    expected: n,
                    got: values.len(),
                });
            }
            if let Some(index) = values
                .iter()
                .position(|v| !v.is_finite() || (nonneg && *v < 0.0))
            {
                return Err(AnalyticError::InvalidValue {
                    field,
                    index,
                    value: values[index],
                });
            }
        }
        if self.gamma() <= 0.0 {
            return Err(AnalyticError::ZeroDemand);
        }
        Ok(())
    }
}

/// Maximum ratio when export is unconstrained: `X0 + sum(cap_plus) / gamma`.
///
/// ```
/// use energyshed::analytic::{max_ratio_unconstrained, CommunitySeries};
/// let c = CommunitySeries {
///     gen: vec![0.2, 0.2],
///     load: vec![1.0, 1.0],
///     cap_plus: vec![0.8, 0.8],
///     export_limit: None,
/// };
/// assert!((max_ratio_unconstrained(&c).unwrap() - 1.0).abs() < 1e-12);
/// ```
pub fn max_ratio_unconstrained(c: &CommunitySeries) -> Result<f64, AnalyticError> {
    if c.export_limit.is_some() {
        return Err(AnalyticError::UnexpectedExportLimit);
    }
    c.check()?;
    let gamma = c.gamma();
    Ok(c.gen.iter().sum::<f64>() / gamma + c.cap_plus.iter().sum::<f64>() / gamma)
}

/// Maximum ratio under per-step limits on net flexibility.
///
/// Every step runs added generation at its cap and soaks up the part above
/// the export limit with added demand. That is optimal only while the
/// resulting ratio stays at or below one; past that point (with some step
/// export-bound) curtailing beats soaking up, and the closed form is refused
/// with [`AnalyticError::SubUnityExportRegime`]. The same error is raised when
/// total export headroom is below the pre-flexibility deficit.
pub fn max_ratio_constrained(c: &CommunitySeries) -> Result<f64, AnalyticError> {
    c.check()?;
    let limit = c.export_limit.as_ref().ok_or(AnalyticError::MissingExportLimit)?;
    let deficit: f64 = c.load.iter().zip(&c.gen).map(|(l, g)| l - g).sum();
    let headroom: f64 = limit.iter().sum();
    let scale = c.gamma().max(1.0);
    if headroom < deficit - 1e-12 * scale {
        return Err(AnalyticError::SubUnityExportRegime);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut export_bound = false;
    for t in 0..c.steps() {
        let soak = (c.cap_plus[t] - limit[t]).max(0.0);
        export_bound |= soak > 0.0;
        num += c.gen[t] + c.cap_plus[t];
        den += c.load[t] + soak;
    }
    if export_bound && num - den > 1e-12 * scale {
        return Err(AnalyticError::SubUnityExportRegime);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    Unconstrained,
    Limits,
    ZeroExport,
}

impl CurveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMode::Unconstrained => "unconstrained",
            CurveMode::Limits => "limits",
            CurveMode::ZeroExport => "zero_export",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityCurvePoint {
    /// Total added-generation budget divided by total demand.
    pub budget: f64,
    /// Total added-generation budget, summed over steps.
    pub budget_total: f64,
    pub max_ratio: f64,
}

/// Evaluate one curve point at normalized budget `b`.
///
/// The budget is spread in proportion to load: `cap_plus[t] = b * load[t]`.
/// The series' own `cap_plus` is ignored.
pub fn curve_point(
    c: &CommunitySeries,
    budget: f64,
    mode: CurveMode,
) -> Result<CapacityCurvePoint, AnalyticError> {
    let mut shaped = c.clone();
    shaped.cap_plus = c.load.iter().map(|l| budget * l).collect();
    let max_ratio = match mode {
        CurveMode::Unconstrained => {
            shaped.export_limit = None;
            max_ratio_unconstrained(&shaped)?
        }
        CurveMode::Limits => {
            if shaped.export_limit.is_none() {
                return Err(AnalyticError::MissingExportLimit);
            }
            max_ratio_constrained(&shaped)?
        }
        CurveMode::ZeroExport => {
            shaped.export_limit = Some(c.load.iter().zip(&c.gen).map(|(l, g)| l - g).collect());
            max_ratio_constrained(&shaped)?
        }
    };
    Ok(CapacityCurvePoint {
        budget,
        budget_total: budget * c.gamma(),
        max_ratio,
    })
}

/// Maximum ratio over a grid of normalized budgets.
pub fn capacity_curve(
    c: &CommunitySeries,
    budget_grid: &[f64],
    mode: CurveMode,
) -> Result<Vec<CapacityCurvePoint>, AnalyticError> {
    let sorted = budget_grid.windows(2).all(|w| w[0] <= w[1]);
    if !sorted || budget_grid.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(AnalyticError::InvalidBudgetGrid);
    }
    budget_grid.iter().map(|&b| curve_point(c, b, mode)).collect()
}

/// Added-generation budget needed to lift the ratio from `x0` to `target`.
pub fn required_budget(target: f64, x0: f64, gamma: f64) -> Result<f64, AnalyticError> {
    if !(gamma > 0.0) {
        return Err(AnalyticError::NonpositiveDemand(gamma));
    }
    if target < x0 {
        return Err(AnalyticError::TargetBelowBaseline { target, x0 });
    }
    Ok((target - x0) * gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(gen: &[f64], load: &[f64], cap: &[f64], limit: Option<&[f64]>) -> CommunitySeries {
        CommunitySeries {
            gen: gen.to_vec(),
            load: load.to_vec(),
            cap_plus: cap.to_vec(),
            export_limit: limit.map(<[f64]>::to_vec),
        }
    }

    #[test]
    fn unconstrained_examples() {
        let c = series(&[0.3, 0.1], &[1.0, 1.0], &[0.0, 0.0], None);
        assert_eq!(max_ratio_unconstrained(&c).unwrap(), c.baseline_ratio().unwrap());
        let c = series(&[0.0, 0.0], &[1.0, 1.0], &[0.5, 0.5], None);
        assert_eq!(max_ratio_unconstrained(&c).unwrap(), 0.5);
        let c = series(&[0.2, 0.2], &[1.0, 1.0], &[0.8, 0.8], None);
        assert!((max_ratio_unconstrained(&c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_demand_rejected() {
        let c = series(&[0.2], &[0.0], &[1.0], None);
        assert_eq!(max_ratio_unconstrained(&c), Err(AnalyticError::ZeroDemand));
        let c = series(&[0.2], &[0.0], &[1.0], Some(&[1.0]));
        assert_eq!(max_ratio_constrained(&c), Err(AnalyticError::ZeroDemand));
    }

    #[test]
    fn constrained_examples() {
        let c = series(&[0.2, 0.2], &[1.0, 1.0], &[0.5, 0.3], Some(&[1.0, 0.8]));
        let mut free = c.clone();
        free.export_limit = None;
        assert!((max_ratio_constrained(&c).unwrap() - max_ratio_unconstrained(&free).unwrap()).abs() < 1e-15);

        let c = series(&[0.2, 0.2], &[1.0, 1.0], &[1.2, 1.2], Some(&[0.8, 0.8]));
        assert!((max_ratio_constrained(&c).unwrap() - 1.0).abs() < 1e-15);

        // microgrid: export headroom equals the deficit, budget covers it
        let c = series(&[0.2, 0.5], &[1.0, 0.9], &[0.8, 0.4], Some(&[0.8, 0.4]));
        assert!((max_ratio_constrained(&c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regime_guard() {
        // export-bound with a ratio that would exceed one
        let c = series(&[0.0, 0.0], &[1.0, 1.0], &[3.0, 3.0], Some(&[1.5, 1.5]));
        assert_eq!(max_ratio_constrained(&c), Err(AnalyticError::SubUnityExportRegime));
        // headroom below the deficit
        let c = series(&[0.0, 0.0], &[1.0, 1.0], &[0.5, 0.5], Some(&[0.5, 0.4]));
        assert_eq!(max_ratio_constrained(&c), Err(AnalyticError::SubUnityExportRegime));
        // above one is fine when no step is export-bound
        let c = series(&[0.0, 0.0], &[1.0, 1.0], &[1.5, 1.5], Some(&[1.5, 1.5]));
        assert_eq!(max_ratio_constrained(&c).unwrap(), 1.5);
    }

    #[test]
    fn curve_examples() {
        let c = series(&[0.1, 0.3], &[1.0, 2.0], &[0.0, 0.0], Some(&[2.0, 2.0]));
        let x0 = c.baseline_ratio().unwrap();
        for mode in [CurveMode::Unconstrained, CurveMode::Limits, CurveMode::ZeroExport] {
            let p = capacity_curve(&c, &[0.0], mode).unwrap();
            assert_eq!(p[0].budget, 0.0);
            assert!((p[0].max_ratio - x0).abs() < 1e-15);
        }

        let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let pts = capacity_curve(&c, &grid, CurveMode::Unconstrained).unwrap();
        let gamma = c.gamma();
        for w in pts.windows(2) {
            let slope = (w[1].max_ratio - w[0].max_ratio) / (w[1].budget_total - w[0].budget_total);
            assert!((slope - 1.0 / gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_export_reaches_unity_at_deficit() {
        // generation proportional to load: the shaped budget covers every step's deficit
        let c = series(&[0.25, 0.5, 0.125], &[1.0, 2.0, 0.5], &[0.0; 3], None);
        let deficit: f64 = c.load.iter().zip(&c.gen).map(|(l, g)| l - g).sum();
        let b = deficit / c.gamma();
        let p = curve_point(&c, b, CurveMode::ZeroExport).unwrap();
        assert!((p.max_ratio - 1.0).abs() < 1e-12);
        assert!((p.budget_total - deficit).abs() < 1e-12);
        // beyond the deficit the microgrid stays at one
        let p = curve_point(&c, 2.0 * b, CurveMode::ZeroExport).unwrap();
        assert!((p.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_grid_rejected() {
        let c = series(&[0.0], &[1.0], &[0.0], None);
        assert_eq!(
            capacity_curve(&c, &[0.5, 0.2], CurveMode::Unconstrained),
            Err(AnalyticError::InvalidBudgetGrid)
        );
        assert_eq!(
            capacity_curve(&c, &[0.5], CurveMode::Limits),
            Err(AnalyticError::MissingExportLimit)
        );
    }

    #[test]
    fn required_budget_examples() {
        assert_eq!(required_budget(0.4, 0.4, 3.0).unwrap(), 0.0);
        assert!((required_budget(1.0, 0.2, 2.0).unwrap() - 1.6).abs() < 1e-15);
        assert!((required_budget(1.0, 0.2, 4.0).unwrap() - 3.2).abs() < 1e-15);
        assert!(matches!(
            required_budget(0.1, 0.2, 2.0),
            Err(AnalyticError::TargetBelowBaseline { .. })
        ));
    }

    fn arb_series() -> impl Strategy<Value = CommunitySeries> {
        (2usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0..1.0f64, n),
                prop::collection::vec(0.1..2.0f64, n),
                prop::collection::vec(0.0..2.0f64, n),
            )
                .prop_map(|(gen, load, cap_plus)| CommunitySeries {
                    gen,
                    load,
                    cap_plus,
                    export_limit: None,
                })
        })
    }

    proptest! {
        #[test]
        fn unconstrained_affine_in_scaling(c in arb_series(), s1 in 0.0..3.0f64, s2 in 0.0..3.0f64) {
            let eval = |s: f64| {
                let mut c = c.clone();
                c.cap_plus.iter_mut().for_each(|v| *v *= s);
                max_ratio_unconstrained(&c).unwrap()
            };
            let slope = c.cap_plus.iter().sum::<f64>() / c.gamma();
            prop_assert!((eval(s2) - eval(s1) - slope * (s2 - s1)).abs() < 1e-12);
        }

        #[test]
        fn constrained_dominated(c in arb_series(), limits in prop::collection::vec(0.0..2.0f64, 6)) {
            let mut lim = c.clone();
            lim.export_limit = Some(limits[..c.steps()].to_vec());
            if let Ok(x) = max_ratio_constrained(&lim) {
                let free = max_ratio_unconstrained(&c).unwrap();
                let bound = c.cap_plus.iter().zip(&limits).all(|(cap, l)| l >= cap);
                prop_assert!(x <= free + 1e-12);
                prop_assert_eq!(bound, (x - free).abs() <= 1e-12 * free.max(1.0));
            }
        }

        #[test]
        fn larger_limit_never_hurts(
            c in arb_series(),
            limits in prop::collection::vec(0.0..2.0f64, 6),
            t in 0usize..6,
            extra in 0.0..1.0f64,
        ) {
            let mut a = c.clone();
            a.export_limit = Some(limits[..c.steps()].to_vec());
            let mut b = a.clone();
            b.export_limit.as_mut().unwrap()[t % c.steps()] += extra;
            if let (Ok(xa), Ok(xb)) = (max_ratio_constrained(&a), max_ratio_constrained(&b)) {
                prop_assert!(xb >= xa - 1e-12);
            }
        }
    }
}
