//! Closed-form tail predictions for `P(M >= x)` and weighted log-linear tail
//! fits used to check simulated and solved curves against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{LevyModel, TailClass};
use crate::offspring::OffspringLaw;
use crate::special::gamma;

/// Minimum number of usable points for a tail fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PositiveMean,
    NegativeMean,
    Centered,
    HeavyTail,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PositiveMean => "positive-mean",
            Regime::NegativeMean => "negative-mean",
            Regime::Centered => "centered",
            Regime::HeavyTail => "heavy-tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Decay {
    /// `constant * x^{-exponent}`
    Power { exponent: f64 },
    /// `constant * exp(-rate x)`
    Exponential { rate: f64 },
}

impl Decay {
    pub fn family(&self) -> &'static str {
        match self {
            Decay::Power { .. } => "power",
            Decay::Exponential { .. } => "exponential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub regime: Regime,
    pub decay: Decay,
    /// `None` when the theory leaves the constant implicit.
    pub constant: Option<f64>,
}

impl TheoryPrediction {
    /// Predicted `P(M >= x)` when the constant is known.
    pub fn evaluate(&self, x: f64) -> Option<f64> {
        let c = self.constant?;
        Some(match self.decay {
            Decay::Power { exponent } => c * x.powf(-exponent),
            Decay::Exponential { rate } => c * (-rate * x).exp(),
        })
    }
}

/// Tail regime and constants for `(model, law)`.
pub fn predict(model: &LevyModel, law: &OffspringLaw) -> Result<TheoryPrediction> {
    let beta = law.beta();
    // c_β Γ(2 - β)
    let cg = law.stable_constant() * gamma(2.0 - beta);
    match model.tail_class() {
        TailClass::Light => {
            let mean = model
                .mean()
                .ok_or_else(|| Error::AmbiguousRegime("light-tailed model without a mean".into()))?;
            if mean > 0.0 {
                Ok(TheoryPrediction {
                    regime: Regime::PositiveMean,
                    decay: Decay::Power {
                        exponent: 1.0 / (beta - 1.0),
                    },
                    constant: Some((mean / cg).powf(1.0 / (beta - 1.0))),
                })
            } else if mean < 0.0 {
                Ok(TheoryPrediction {
                    regime: Regime::NegativeMean,
                    decay: Decay::Exponential {
                        rate: model.cramer_root()?,
                    },
                    constant: None,
                })
            } else {
                let var = model
                    .variance()
                    .ok_or_else(|| Error::AmbiguousRegime("centered model without variance".into()))?;
                Ok(TheoryPrediction {
                    regime: Regime::Centered,
                    decay: Decay::Power {
                        exponent: 2.0 / (beta - 1.0),
                    },
                    constant: Some(((beta + 1.0) * var / (cg * (beta - 1.0))).powf(1.0 / (beta - 1.0))),
                })
            }
        }
        TailClass::RegularlyVarying { alpha, constant } => Ok(TheoryPrediction {
            regime: Regime::HeavyTail,
            decay: Decay::Power {
                exponent: alpha / beta,
            },
            constant: Some(constant.powf(1.0 / beta) * ((beta - 1.0) / cg).powf(1.0 / beta)),
        }),
    }
}

/// Estimated or computed survival function on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Upper censoring bound, when the curve comes from capped simulation.
    pub upper: Option<Vec<f64>>,
}

impl TailCurve {
    /// Curve with zero uncertainty (solver output, synthetic data).
    pub fn exact(x: Vec<f64>, value: Vec<f64>) -> Self {
        let n = value.len();
        Self {
            x,
            value,
            stderr: vec![0.0; n],
            upper: None,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Default fit window: from the first `x` with `value <= 0.05` to the last
    /// `x` with `value >= 25 stderr`, restricted to points where the censoring
    /// gap `upper - value` is below one stderr.
    pub fn auto_window(&self) -> Option<(f64, f64)> {
        let lo_idx = self.value.iter().position(|&v| v <= 0.05)?;
        self.signal_window(self.x[lo_idx], f64::INFINITY)
    }

    /// Largest window starting at the first `x >= lo` and ending at or before
    /// `hi` over which every point has `value >= 25 stderr` and a censoring
    /// gap below one stderr.
    pub fn signal_window(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let lo_idx = self.x.iter().position(|&x| x >= lo)?;
        let mut hi_idx = None;
        for i in lo_idx..self.len() {
            let v = self.value[i];
            let se = self.stderr[i];
            if self.x[i] > hi || v <= 0.0 || v < 25.0 * se {
                break;
            }
            if let Some(up) = &self.upper {
                if up[i] - v >= se && se > 0.0 {
                    break;
                }
            }
            hi_idx = Some(i);
        }
        Some((self.x[lo_idx], self.x[hi_idx?]))
    }

    /// Window bracketing the points whose value lies in `[v_lo, v_hi]`.
    pub fn window_by_value(&self, v_lo: f64, v_hi: f64) -> Option<(f64, f64)> {
        let inside: Vec<f64> = self
            .x
            .iter()
            .zip(&self.value)
            .filter(|(_, &v)| v >= v_lo && v <= v_hi)
            .map(|(&x, _)| x)
            .collect();
        Some((*inside.first()?, *inside.last()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// Regression standard error. Tail estimates at neighbouring `x` share
    /// exceedances, so for Monte Carlo curves this understates the spread.
    pub exponent_stderr: f64,
    pub constant_stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub rate: f64,
    pub rate_stderr: f64,
    pub constant: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FitResult {
    Power(PowerFit),
    Exponential(ExponentialFit),
}

impl FitResult {
    pub fn family(&self) -> &'static str {
        match self {
            FitResult::Power(_) => "power",
            FitResult::Exponential(_) => "exponential",
        }
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    slope_se: f64,
    intercept_se: f64,
    n: usize,
}

/// Weighted least squares of `ln value` on `t(x)` over the usable points.
fn weighted_line<T: Fn(f64) -> f64>(curve: &TailCurve, lo: f64, hi: f64, transform: T) -> Result<LineFit> {
    let mut in_window = 0usize;
    let mut pts = Vec::new();
    for i in 0..curve.len() {
        let x = curve.x[i];
        if x < lo || x > hi {
            continue;
        }
        in_window += 1;
        let v = curve.value[i];
        let se = curve.stderr[i];
        if !(v > 0.0) || v <= 10.0 * se {
            continue;
        }
        pts.push((transform(x), v.ln(), se / v));
    }
    if pts.len() < MIN_FIT_POINTS {
        if in_window >= MIN_FIT_POINTS {
            return Err(Error::SignalBelowNoise { lo, hi });
        }
        return Err(Error::InsufficientPoints {
            found: pts.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let noiseless = pts.iter().all(|p| p.2 == 0.0);
    let w = |rel: f64| if noiseless { 1.0 } else { 1.0 / (rel * rel).max(1e-300) };
    let (mut sw, mut swx, mut swy) = (0.0, 0.0, 0.0);
    for &(t, y, rel) in &pts {
        let wi = w(rel);
        sw += wi;
        swx += wi * t;
        swy += wi * y;
    }
    let (tm, ym) = (swx / sw, swy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, y, rel) in &pts {
        let wi = w(rel);
        sxx += wi * (t - tm) * (t - tm);
        sxy += wi * (t - tm) * (y - ym);
    }
    if sxx <= 0.0 {
        return Err(Error::InsufficientPoints {
            found: 1,
            needed: MIN_FIT_POINTS,
        });
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let (slope_var, intercept_var) = if noiseless {
        // Residual-based variances (zero for exact data).
        let rss: f64 = pts
            .iter()
            .map(|&(t, y, _)| (y - intercept - slope * t).powi(2))
            .sum();
        let s2 = rss / (pts.len() - 2) as f64;
        (s2 / sxx, s2 * (1.0 / sw + tm * tm / sxx))
    } else {
        (1.0 / sxx, 1.0 / sw + tm * tm / sxx)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_se: slope_var.sqrt(),
        intercept_se: intercept_var.sqrt(),
        n: pts.len(),
    })
}

/// Fit `value ≈ constant x^{-exponent}` on `[x_lo, x_hi]`.
pub fn fit_power_tail(curve: &TailCurve, x_lo: f64, x_hi: f64) -> Result<PowerFit> {
    if !(x_lo > 0.0) {
        return Err(Error::Parameter(format!("power fit needs x_lo > 0, got {x_lo}")));
    }
    let line = weighted_line(curve, x_lo, x_hi, f64::ln)?;
    let constant = line.intercept.exp();
    Ok(PowerFit {
        exponent: -line.slope,
        constant,
        exponent_stderr: line.slope_se,
        constant_stderr: constant * line.intercept_se,
        window: (x_lo, x_hi),
        points: line.n,
    })
}

/// Fit `value ≈ constant exp(-rate x)` on `[x_lo, x_hi]`.
pub fn fit_exponential_tail(curve: &TailCurve, x_lo: f64, x_hi: f64) -> Result<ExponentialFit> {
    let line = weighted_line(curve, x_lo, x_hi, |x| x)?;
    Ok(ExponentialFit {
        rate: -line.slope,
        rate_stderr: line.slope_se,
        constant: line.intercept.exp(),
        window: (x_lo, x_hi),
        points: line.n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance on the exponent or rate.
    pub decay_abs: f64,
    /// Relative tolerance on the constant.
    pub constant_rel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Pass,
    Fail,
    Skipped,
}

impl Check {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Check::Pass
        } else {
            Check::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub regime: Regime,
    pub predicted: TheoryPrediction,
    pub fitted: FitResult,
    pub window: (f64, f64),
    pub tolerances: Tolerances,
    pub decay_check: Check,
    pub constant_check: Check,
    pub pass: bool,
}

/// Check a fit against a prediction.
pub fn compare(pred: &TheoryPrediction, fit: &FitResult, tol: Tolerances) -> Result<Comparison> {
    let (pred_decay, fit_decay, fit_const, window) = match (pred.decay, fit) {
        (Decay::Power { exponent }, FitResult::Power(f)) => (exponent, f.exponent, f.constant, f.window),
        (Decay::Exponential { rate }, FitResult::Exponential(f)) => (rate, f.rate, f.constant, f.window),
        _ => {
            return Err(Error::FamilyMismatch {
                predicted: pred.decay.family(),
                fitted: fit.family(),
            })
        }
    };
    let decay_check = Check::from_bool((fit_decay - pred_decay).abs() <= tol.decay_abs);
    let constant_check = match pred.constant {
        None => Check::Skipped,
        Some(c) => Check::from_bool(((fit_const - c) / c).abs() <= tol.constant_rel),
    };
    let pass = decay_check == Check::Pass && constant_check != Check::Fail;
    Ok(Comparison {
        regime: pred.regime,
        predicted: *pred,
        fitted: *fit,
        window,
        tolerances: tol,
        decay_check,
        constant_check,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> OffspringLaw {
        OffspringLaw::canonical(1.5, 0.5).unwrap()
    }

    fn power(p: &TheoryPrediction) -> f64 {
        match p.decay {
            Decay::Power { exponent } => exponent,
            _ => panic!("expected power decay"),
        }
    }

    #[test]
    fn predictions_for_reference_configurations() {
        let p = predict(&LevyModel::brownian(1.0, 1.0).unwrap(), &law()).unwrap();
        assert_eq!(p.regime, Regime::PositiveMean);
        assert!((power(&p) - 2.0).abs() < 1e-12);
        assert!((p.constant.unwrap() - 16.0).abs() < 1e-10);

        let p = predict(&LevyModel::brownian(0.0, 1.0).unwrap(), &law()).unwrap();
        assert_eq!(p.regime, Regime::Centered);
        assert!((power(&p) - 4.0).abs() < 1e-12);
        assert!((p.constant.unwrap() - 400.0).abs() < 1e-9);

        let p = predict(&LevyModel::cauchy(1e-3).unwrap(), &law()).unwrap();
        assert_eq!(p.regime, Regime::HeavyTail);
        assert!((power(&p) - 2.0 / 3.0).abs() < 1e-12);
        let expected = (2.0 / std::f64::consts::PI).powf(2.0 / 3.0);
        assert!((p.constant.unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.7399).abs() < 2e-4);

        let p = predict(&LevyModel::brownian(-1.0, 1.0).unwrap(), &law()).unwrap();
        assert_eq!(p.regime, Regime::NegativeMean);
        assert_eq!(p.decay, Decay::Exponential { rate: 2.0 });
        assert_eq!(p.constant, None);
    }

    #[test]
    fn positive_mean_scaling() {
        let l = law();
        for &mu in &[0.3, 1.0, 2.5] {
            let a = predict(&LevyModel::brownian(mu, 1.0).unwrap(), &l).unwrap();
            let b = predict(&LevyModel::brownian(2.0 * mu, 1.0).unwrap(), &l).unwrap();
            let ratio = b.constant.unwrap() / a.constant.unwrap();
            assert!((ratio - 2f64.powf(1.0 / (l.beta() - 1.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn heavy_tail_exponent_near_beta_two() {
        for &alpha in &[0.5, 1.0, 1.5] {
            let l = OffspringLaw::canonical(1.999, 0.4).unwrap();
            let m = LevyModel::stable(alpha, 1.0, 1e-3).unwrap();
            let e = power(&predict(&m, &l).unwrap());
            assert!(e > alpha / 2.0 && e <= alpha / 1.999);
        }
    }

    fn synthetic(f: impl Fn(f64) -> f64, xs: Vec<f64>) -> TailCurve {
        let v = xs.iter().map(|&x| f(x)).collect();
        TailCurve::exact(xs, v)
    }

    #[test]
    fn exact_power_curves() {
        let xs: Vec<f64> = (1..=40).map(|i| 5.0 * i as f64).collect();
        let c = synthetic(|x| 16.0 * x.powi(-2), xs);
        let f = fit_power_tail(&c, 10.0, 100.0).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-10);
        assert!((f.constant - 16.0).abs() < 1e-10);

        let xs: Vec<f64> = (0..30).map(|i| 1.3f64.powi(i)).collect();
        let c = synthetic(|x| 0.7399 * x.powf(-2.0 / 3.0), xs);
        let f = fit_power_tail(&c, 2.0, 1e3).unwrap();
        assert!((f.exponent - 2.0 / 3.0).abs() < 1e-6);
        assert!((f.constant - 0.7399).abs() < 1e-6);
    }

    #[test]
    fn exact_exponential_curve() {
        let xs: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let c = synthetic(|x| 0.3 * (-2.0 * x).exp(), xs);
        let f = fit_exponential_tail(&c, 0.5, 4.0).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-10);
        assert!((f.constant - 0.3).abs() < 1e-10);
    }

    #[test]
    fn fit_errors() {
        let xs: Vec<f64> = (1..=4).map(|i| i as f64).collect();
        let c = synthetic(|x| 1.0 / x, xs);
        assert!(matches!(
            fit_power_tail(&c, 1.0, 4.0),
            Err(Error::InsufficientPoints { .. })
        ));
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let mut c = synthetic(|x| 1e-3 / x, xs);
        c.stderr = vec![1e-3; 10];
        assert!(matches!(
            fit_power_tail(&c, 1.0, 10.0),
            Err(Error::SignalBelowNoise { .. })
        ));
    }

    #[test]
    fn compare_examples() {
        let pred = TheoryPrediction {
            regime: Regime::PositiveMean,
            decay: Decay::Power { exponent: 2.0 },
            constant: Some(16.0),
        };
        let fit = FitResult::Power(PowerFit {
            exponent: 1.97,
            constant: 14.8,
            exponent_stderr: 0.01,
            constant_stderr: 0.1,
            window: (10.0, 100.0),
            points: 20,
        });
        let tol = Tolerances {
            decay_abs: 0.15,
            constant_rel: 0.25,
        };
        assert!(compare(&pred, &fit, tol).unwrap().pass);

        let pred = TheoryPrediction {
            regime: Regime::NegativeMean,
            decay: Decay::Exponential { rate: 2.0 },
            constant: None,
        };
        let fit = FitResult::Exponential(ExponentialFit {
            rate: 2.3,
            rate_stderr: 0.01,
            constant: 0.2,
            window: (1.0, 5.0),
            points: 20,
        });
        let tol = Tolerances {
            decay_abs: 0.2,
            constant_rel: 0.25,
        };
        let r = compare(&pred, &fit, tol).unwrap();
        assert!(!r.pass);
        assert_eq!(r.constant_check, Check::Skipped);
        // Symmetric in direction.
        let fit_low = FitResult::Exponential(ExponentialFit { rate: 1.7, ..match fit {
            FitResult::Exponential(e) => e,
            _ => unreachable!(),
        }});
        assert!(!compare(&pred, &fit_low, tol).unwrap().pass);
        let fit_ok = FitResult::Exponential(ExponentialFit { rate: 1.85, ..match fit {
            FitResult::Exponential(e) => e,
            _ => unreachable!(),
        }});
        let r = compare(&pred, &fit_ok, tol).unwrap();
        assert!(r.pass);
        assert_eq!(r.constant_check, Check::Skipped);

        let power_pred = TheoryPrediction {
            regime: Regime::PositiveMean,
            decay: Decay::Power { exponent: 2.0 },
            constant: Some(16.0),
        };
        assert!(matches!(
            compare(&power_pred, &fit, tol),
            Err(Error::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn auto_window_respects_noise_and_censoring() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let n = 1e6;
        let value: Vec<f64> = xs.iter().map(|&x| (16.0 / (x * x)).min(1.0)).collect();
        let stderr: Vec<f64> = value.iter().map(|&v| (v * (1.0 - v) / n).sqrt()).collect();
        let curve = TailCurve {
            x: xs.clone(),
            value: value.clone(),
            stderr: stderr.clone(),
            upper: Some(value.clone()),
        };
        let (lo, hi) = curve.auto_window().unwrap();
        assert_eq!(lo, 18.0);
        // v >= 25 sqrt(v / n) <=> v >= 6.25e-4 <=> x <= 160.
        assert_eq!(hi, 160.0);
        let mut up = value.clone();
        for u in up.iter_mut().skip(100) {
            *u += 1e-3;
        }
        let curve = TailCurve {
            upper: Some(up),
            ..curve
        };
        assert_eq!(curve.auto_window().unwrap().1, 99.0);
    }
}
