//! Natural cubic splines and least-squares polynomials for smoothing and
//! resampling captured series.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Hard cap on polynomial degree used by [`Smoother::capped`].
pub const MAX_POLY_DEGREE: usize = 15;
pub const DEFAULT_POLY_DEGREE: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmoothError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("abscissae must be strictly increasing (violated at index {index})")]
    NonMonotone { index: usize },
    #[error("x and y lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("degree {degree} fit is rank deficient; reduce degree to at most {max_degree}")]
    RankDeficient { degree: usize, max_degree: usize },
    #[error("resampling rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("input contains non-finite values")]
    NonFinite,
}

fn check_xy(x: &[f64], y: &[f64], min: usize) -> Result<(), SmoothError> {
    if x.len() != y.len() {
        return Err(SmoothError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < min {
        return Err(SmoothError::TooFewPoints {
            needed: min,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(SmoothError::NonFinite);
    }
    Ok(())
}

/// Natural cubic spline. On interval `i` the value is
/// `a[i] + b[i]·h + c[i]·h² + d[i]·h³` with `h = x − knots[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    knots: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

pub fn fit_natural_cubic_spline(x: &[f64], y: &[f64]) -> Result<Spline, SmoothError> {
    check_xy(x, y, 2)?;
    if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SmoothError::NonMonotone { index: i + 1 });
    }
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    // second derivatives; natural boundary pins both ends to zero
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * (h[i - 1] + h[i])).collect();
        let mut rhs: Vec<f64> = (1..n - 1)
            .map(|i| 6.0 * (slope[i] - slope[i - 1]))
            .collect();
        // Thomas sweep: sub-diagonal h[i], super-diagonal h[i+1]
        for r in 1..k {
            let w = h[r] / diag[r - 1];
            diag[r] -= w * h[r];
            rhs[r] -= w * rhs[r - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for r in (0..k - 1).rev() {
            m[r + 1] = (rhs[r] - h[r + 1] * m[r + 2]) / diag[r];
        }
    }

    let a = y[..n - 1].to_vec();
    let b = (0..n - 1)
        .map(|i| slope[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0)
        .collect();
    let c = (0..n - 1).map(|i| m[i] / 2.0).collect();
    let d = (0..n - 1)
        .map(|i| (m[i + 1] - m[i]) / (6.0 * h[i]))
        .collect();
    Ok(Spline {
        knots: x.to_vec(),
        a,
        b,
        c,
        d,
    })
}

impl Spline {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_pieces(&self) -> usize {
        self.a.len()
    }

    /// Cubic coefficients `(a, b, c, d)` of piece `i`.
    pub fn coefficients(&self, i: usize) -> (f64, f64, f64, f64) {
        (self.a[i], self.b[i], self.c[i], self.d[i])
    }

    /// Value, first and second derivative of piece `i` at `x`, without
    /// range checks.
    pub fn eval_piece(&self, i: usize, x: f64) -> (f64, f64, f64) {
        let h = x - self.knots[i];
        let (a, b, c, d) = self.coefficients(i);
        (
            a + h * (b + h * (c + h * d)),
            b + h * (2.0 * c + 3.0 * h * d),
            2.0 * c + 6.0 * d * h,
        )
    }

    fn piece_index(&self, x: f64) -> usize {
        let p = self.knots.partition_point(|&k| k <= x);
        p.saturating_sub(1).min(self.num_pieces() - 1)
    }

    fn end_slope(&self) -> (f64, f64) {
        let last = self.num_pieces() - 1;
        let x_end = *self.knots.last().unwrap();
        (self.b[0], self.eval_piece(last, x_end).1)
    }

    /// Evaluate the spline; linear extrapolation with the end slope outside the knots.
    pub fn eval(&self, x: f64) -> f64 {
        let first = self.knots[0];
        let last = *self.knots.last().unwrap();
        let (s0, s1) = self.end_slope();
        if x < first {
            self.a[0] + s0 * (x - first)
        } else if x > last {
            let end = self.eval_piece(self.num_pieces() - 1, last).0;
            end + s1 * (x - last)
        } else {
            self.eval_piece(self.piece_index(x), x).0
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (s0, s1) = self.end_slope();
        if x < self.knots[0] {
            s0
        } else if x > *self.knots.last().unwrap() {
            s1
        } else {
            self.eval_piece(self.piece_index(x), x).1
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        if x < self.knots[0] || x > *self.knots.last().unwrap() {
            0.0
        } else {
            self.eval_piece(self.piece_index(x), x).2
        }
    }
}

pub fn eval_spline(s: &Spline, x: f64) -> f64 {
    s.eval(x)
}

/// Least-squares polynomial. Evaluation runs in a centred and scaled
/// variable; `coefficients` holds the same polynomial in ascending powers of x.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
    center: f64,
    scale: f64,
    scaled: Vec<f64>,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.scale;
        self.scaled.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }
}

fn distinct_count(x: &[f64]) -> usize {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Householder-QR least squares; normal equations are never formed.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit, SmoothError> {
    check_xy(x, y, degree + 1)?;
    let distinct = distinct_count(x);
    if distinct < degree + 1 {
        return Err(SmoothError::RankDeficient {
            degree,
            max_degree: distinct.saturating_sub(1),
        });
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    let n = x.len();
    let cols = degree + 1;
    let vander = DMatrix::from_fn(n, cols, |r, c| ((x[r] - center) / scale).powi(c as i32));
    let qr = vander.clone().qr();
    let r = qr.r();
    let rmax = (0..cols).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    if let Some(k) = (0..cols).find(|&k| r[(k, k)].abs() <= 1e-12 * rmax) {
        return Err(SmoothError::RankDeficient {
            degree,
            max_degree: k.saturating_sub(1),
        });
    }
    let rhs = qr.q().transpose() * DVector::from_column_slice(y);
    let scaled = r
        .solve_upper_triangular(&rhs)
        .ok_or(SmoothError::RankDeficient {
            degree,
            max_degree: degree.saturating_sub(1),
        })?;
    let residual = &vander * &scaled - DVector::from_column_slice(y);
    let residual_rms = (residual.norm_squared() / n as f64).sqrt();

    // expand Σ s_k ((x − m)/σ)^k into powers of x
    let mut coefficients = vec![0.0; cols];
    for (k, &sk) in scaled.iter().enumerate() {
        let factor = sk / scale.powi(k as i32);
        for (j, coef) in coefficients.iter_mut().enumerate().take(k + 1) {
            *coef += factor * binomial(k, j) * (-center).powi((k - j) as i32);
        }
    }
    Ok(PolyFit {
        degree,
        coefficients,
        residual_rms,
        center,
        scale,
        scaled: scaled.iter().copied().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoother {
    Spline,
    Polynomial(usize),
}

impl Smoother {
    /// Clamp a polynomial degree to `min(15, n − 1)`.
    pub fn capped(self, n: usize) -> Smoother {
        match self {
            Smoother::Polynomial(d) => {
                Smoother::Polynomial(d.min(MAX_POLY_DEGREE).min(n.saturating_sub(1)))
            }
            s => s,
        }
    }
}

impl std::str::FromStr for Smoother {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "spline" => Ok(Smoother::Spline),
            "poly" => Ok(Smoother::Polynomial(DEFAULT_POLY_DEGREE)),
            other => other
                .strip_prefix("poly:")
                .and_then(|d| d.parse().ok())
                .map(Smoother::Polynomial)
                .ok_or_else(|| format!("expected `spline` or `poly:<degree>`, got `{other}`")),
        }
    }
}

/// A fitted smoother ready for evaluation.
#[derive(Debug, Clone)]
pub enum Fitted {
    Constant(f64),
    Spline(Spline),
    Poly(PolyFit),
}

impl Fitted {
    pub fn fit(x: &[f64], y: &[f64], method: Smoother) -> Result<Fitted, SmoothError> {
        check_xy(x, y, 1)?;
        if x.len() == 1 {
            return Ok(Fitted::Constant(y[0]));
        }
        match method {
            Smoother::Spline => fit_natural_cubic_spline(x, y).map(Fitted::Spline),
            Smoother::Polynomial(d) => fit_polynomial(x, y, d).map(Fitted::Poly),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Fitted::Constant(c) => *c,
            Fitted::Spline(s) => s.eval(x),
            Fitted::Poly(p) => p.eval(x),
        }
    }
}

/// Uniform grid `t0, t0 + 1/rate, …` not exceeding the last sample time.
pub fn uniform_grid(t_first: f64, t_last: f64, rate: f64) -> Vec<f64> {
    let count = ((t_last - t_first) * rate + 1e-9).floor() as usize + 1;
    (0..count).map(|k| t_first + k as f64 / rate).collect()
}

/// Resample a series onto a uniform grid spanning its time range.
pub fn resample_uniform(
    t: &[f64],
    y: &[f64],
    rate: f64,
    method: Smoother,
) -> Result<(Vec<f64>, Vec<f64>), SmoothError> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(SmoothError::InvalidRate(rate));
    }
    let fitted = Fitted::fit(t, y, method)?;
    let grid = uniform_grid(t[0], t[t.len() - 1], rate);
    let values = grid.iter().map(|&g| fitted.eval(g)).collect();
    Ok((grid, values))
}
