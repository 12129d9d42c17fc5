use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitModel {
    /// `v = c (log(n + 1))^q`.
    LogPower,
    /// `v = c p^q`.
    PPower,
}

impl FitModel {
    fn abscissa(self, t: f64) -> Result<f64> {
        let x = match self {
            FitModel::LogPower if t > 0.0 => (t + 1.0).ln().ln(),
            FitModel::PPower if t > 0.0 => t.ln(),
            _ => return Err(Error::Fit(format!("abscissa {t} must be positive"))),
        };
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
    pub model: FitModel,
}

/// Least squares of `ln v` against `ln ln(n + 1)` or `ln p`.
pub fn growth_fit(points: &[(f64, f64)], model: FitModel) -> Result<GrowthFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "{} points; need at least 4",
            points.len()
        )));
    }
    let xy = points
        .iter()
        .map(|&(t, v)| {
            if v > 0.0 && v.is_finite() {
                Ok((model.abscissa(t)?, v.ln()))
            } else {
                Err(Error::Fit(format!("value {v} must be positive")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let m = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / m;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(GrowthFit {
        coefficient: intercept.exp(),
        exponent,
        r_squared,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_points(c: f64, q: f64) -> Vec<(f64, f64)> {
        [8.0, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&n: &f64| (n, c * (n + 1.0).ln().powf(q)))
            .collect()
    }

    #[test]
    fn exact_models_are_recovered() {
        let f = growth_fit(&log_points(2.0, 1.0), FitModel::LogPower).unwrap();
        assert!((f.coefficient - 2.0).abs() < 1e-12);
        assert!((f.exponent - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);

        let f = growth_fit(&log_points(0.5, 2.0), FitModel::LogPower).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-6);

        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&p: &f64| (p, 3.0 * p.powf(0.5)))
            .collect();
        let f = growth_fit(&pts, FitModel::PPower).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12 && (f.coefficient - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            growth_fit(&log_points(1.0, 1.0)[..3], FitModel::LogPower),
            Err(Error::Fit(_))
        ));
        let same = vec![(4.0, 1.0), (4.0, 2.0), (4.0, 3.0), (4.0, 4.0)];
        assert!(matches!(
            growth_fit(&same, FitModel::LogPower),
            Err(Error::Fit(_))
        ));
        let neg = vec![(4.0, 1.0), (5.0, -2.0), (6.0, 3.0), (7.0, 4.0)];
        assert!(matches!(
            growth_fit(&neg, FitModel::PPower),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn noisy_fit_has_lower_r_squared() {
        let mut pts = log_points(1.0, 1.0);
        pts[2].1 *= 1.3;
        let f = growth_fit(&pts, FitModel::LogPower).unwrap();
        assert!(f.r_squared < 1.0 && f.r_squared > 0.0);
    }
}
