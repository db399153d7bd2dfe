//! Least-squares fits for the scaling laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `y = a·N + b·√N`
    LinearSqrt,
    /// `y = c·N^{3/2}`
    ThreeHalves,
    /// `y = c·x^e`, fitted on log-log axes.
    PowerLaw,
    /// `y = A·e^{−k·r}`, fitted on log-linear axes.
    ExpDecay,
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitModel::LinearSqrt => "linear_sqrt",
            FitModel::ThreeHalves => "three_halves",
            FitModel::PowerLaw => "power_law",
            FitModel::ExpDecay => "exp_decay",
        })
    }
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_sqrt" => Ok(FitModel::LinearSqrt),
            "three_halves" => Ok(FitModel::ThreeHalves),
            "power_law" => Ok(FitModel::PowerLaw),
            "exp_decay" => Ok(FitModel::ExpDecay),
            other => Err(Error::Parse(format!("fit model `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// `[a, b]`, `[c]`, `[c, e]` or `[A, k]` depending on the model.
    pub coefficients: Vec<f64>,
    /// Standard errors of `coefficients`, in the space the fit was solved
    /// in (log space for the amplitude of log-linear fits). NaN when there
    /// are no residual degrees of freedom.
    pub std_errors: Vec<f64>,
    /// Euclidean norm of `y − ŷ` in the original units.
    pub residual_norm: f64,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        match self.model {
            FitModel::LinearSqrt => c[0] * x + c[1] * x.sqrt(),
            FitModel::ThreeHalves => c[0] * x.powf(1.5),
            FitModel::PowerLaw => c[0] * x.powf(c[1]),
            FitModel::ExpDecay => c[0] * (-c[1] * x).exp(),
        }
    }
}

/// Ordinary least squares over `p ≤ 2` basis columns. Returns coefficients
/// and their standard errors.
fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = rows[0].len();
    let n = rows.len();
    let mut xtx = [[0.0f64; 2]; 2];
    let mut xty = [0.0f64; 2];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let inv: Vec<Vec<f64>> = match p {
        1 => {
            if xtx[0][0] <= 0.0 {
                return Err(Error::DegenerateFit("zero design column".into()));
            }
            vec![vec![1.0 / xtx[0][0]]]
        }
        2 => {
            let det = xtx[0][0] * xtx[1][1] - xtx[0][1] * xtx[1][0];
            let scale = xtx[0][0] * xtx[1][1];
            if !(det.abs() > 1e-12 * scale.abs()) {
                return Err(Error::DegenerateFit("singular design matrix".into()));
            }
            vec![
                vec![xtx[1][1] / det, -xtx[0][1] / det],
                vec![-xtx[1][0] / det, xtx[0][0] / det],
            ]
        }
        _ => unreachable!("at most two basis functions"),
    };
    let coef: Vec<f64> = (0..p).map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum()).collect();
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let fit: f64 = row.iter().zip(&coef).map(|(x, c)| x * c).sum();
            (yi - fit).powi(2)
        })
        .sum();
    let dof = n.saturating_sub(p);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    let se = (0..p).map(|i| (sigma2 * inv[i][i]).sqrt()).collect();
    Ok((coef, se))
}

fn require_distinct_x(points: &[(f64, f64)], min: usize) -> Result<()> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < min {
        return Err(Error::DegenerateFit(format!(
            "need at least {min} distinct abscissae, got {}",
            xs.len()
        )));
    }
    Ok(())
}

fn finish(model: FitModel, coefficients: Vec<f64>, std_errors: Vec<f64>, points: &[(f64, f64)]) -> FitResult {
    let mut fit = FitResult {
        model,
        coefficients,
        std_errors,
        residual_norm: 0.0,
    };
    fit.residual_norm = points
        .iter()
        .map(|&(x, y)| (y - fit.predict(x)).powi(2))
        .sum::<f64>()
        .sqrt();
    fit
}

/// `y ≈ a·N + b·√N`.
pub fn fit_linear_sqrt(points: &[(f64, f64)]) -> Result<FitResult> {
    require_distinct_x(points, 2)?;
    let rows: Vec<Vec<f64>> = points.iter().map(|&(n, _)| vec![n, n.sqrt()]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (coef, se) = least_squares(&rows, &y)?;
    Ok(finish(FitModel::LinearSqrt, coef, se, points))
}

/// `y ≈ c·N^{3/2}`.
pub fn fit_three_halves(points: &[(f64, f64)]) -> Result<FitResult> {
    require_distinct_x(points, 1)?;
    let rows: Vec<Vec<f64>> = points.iter().map(|&(n, _)| vec![n.powf(1.5)]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (coef, se) = least_squares(&rows, &y)?;
    Ok(finish(FitModel::ThreeHalves, coef, se, points))
}

fn log_linear(points: &[(f64, f64)], log_x: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    require_distinct_x(points, 2)?;
    if let Some(&(x, y)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive ordinate {y} at {x}")));
    }
    if log_x && points.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::DegenerateFit("non-positive abscissa on log axis".into()));
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|&(x, _)| vec![1.0, if log_x { x.ln() } else { x }])
        .collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    least_squares(&rows, &y)
}

/// `y ≈ c·x^e`, by least squares on `ln y = ln c + e·ln x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    let (coef, se) = log_linear(points, true)?;
    Ok(finish(FitModel::PowerLaw, vec![coef[0].exp(), coef[1]], se, points))
}

/// `y ≈ A·e^{−k·r}`, by least squares on `ln y = ln A − k·r`.
pub fn fit_exp_decay(points: &[(f64, f64)]) -> Result<FitResult> {
    let (coef, se) = log_linear(points, false)?;
    Ok(finish(FitModel::ExpDecay, vec![coef[0].exp(), -coef[1]], se, points))
}
