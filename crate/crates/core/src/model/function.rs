//! Concrete, evaluable functions of one variable.
//!
//! The same [`FunctionSpec`] describes boundary data `u1(t)`, `u2(t)`, the
//! coefficient `a(t)`, the initial profile `h(x)` and the separable factors
//! of the source `f(x, t)`. Analytic kinds evaluate and differentiate
//! exactly; sample tables interpolate linearly and are differentiated by
//! central differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineTerm {
    pub coef: f64,
    pub mode: u32,
}

/// Linearly interpolated sample table with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SampleTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidSpec(format!(
                "sample table has {} abscissae and {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidSpec("sample table needs at least 2 points".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("sample table contains non-finite values".into()));
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(format!(
                "sample table abscissae not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Linear interpolation; NaN outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo).max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return f64::NAN;
        }
        let x = x.clamp(lo, hi);
        let k = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= self.xs.len() => self.xs.len() - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let w = (x - x0) / (x1 - x0);
        self.ys[k] * (1.0 - w) + self.ys[k + 1] * w
    }

    fn derivative(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let step = 1e-6 * (hi - lo);
        let left = (x - step).max(lo);
        let right = (x + step).min(hi);
        (self.eval(right) - self.eval(left)) / (right - left)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// `c0 + c1 s + c2 s^2 + ...`
    Polynomial {
        coefs: Vec<f64>,
    },
    /// `scale * exp(-rate * s) + offset`
    Exponential {
        scale: f64,
        rate: f64,
        offset: f64,
    },
    /// `offset + amplitude * sin(omega * s)`
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        omega: f64,
    },
    /// `sum_j coef_j * sin(mode_j * s)`
    SineSeries {
        terms: Vec<SineTerm>,
    },
    Table(SampleTable),
}

impl FunctionSpec {
    pub const KINDS: [&'static str; 6] = [
        "constant",
        "polynomial",
        "exponential",
        "sinusoidal",
        "sine_series",
        "table",
    ];

    pub fn zero() -> Self {
        FunctionSpec::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        FunctionSpec::Constant { value }
    }

    pub fn exponential(scale: f64, rate: f64) -> Self {
        FunctionSpec::Exponential {
            scale,
            rate,
            offset: 0.0,
        }
    }

    pub fn sinusoidal(offset: f64, amplitude: f64, omega: f64) -> Self {
        FunctionSpec::Sinusoidal {
            offset,
            amplitude,
            omega,
        }
    }

    /// Validated sine combination from `(coef, mode)` pairs.
    pub fn sine_series(terms: &[(f64, u32)]) -> Result<Self> {
        let terms: Vec<SineTerm> = terms.iter().map(|&(coef, mode)| SineTerm { coef, mode }).collect();
        let spec = FunctionSpec::SineSeries { terms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(coefs: Vec<f64>) -> Self {
        FunctionSpec::Polynomial { coefs }
    }

    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Ok(FunctionSpec::Table(SampleTable::new(xs, ys)?))
    }

    /// Builds a spec from a kind name and a flat parameter list.
    ///
    /// | kind          | params                                   |
    /// |---------------|------------------------------------------|
    /// | `constant`    | `[c]`                                    |
    /// | `polynomial`  | `[c0, c1, ...]`                          |
    /// | `exponential` | `[rate]`, `[scale, rate]` or `[scale, rate, offset]` |
    /// | `sinusoidal`  | `[offset, amplitude]` or `[offset, amplitude, omega]` |
    /// | `sine_series` | `[k1, m1, k2, m2, ...]`                  |
    /// | `table`       | `[x0, y0, x1, y1, ...]`                  |
    pub fn from_params(kind: &str, params: &[f64]) -> Result<Self> {
        let arity = |allowed: &[usize]| -> Result<()> {
            if allowed.contains(&params.len()) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "kind `{kind}` takes {allowed:?} parameters, got {}",
                    params.len()
                )))
            }
        };
        let spec = match kind {
            "constant" => {
                arity(&[1])?;
                FunctionSpec::constant(params[0])
            }
            "polynomial" => {
                if params.is_empty() {
                    return Err(Error::InvalidSpec("polynomial needs at least one coefficient".into()));
                }
                FunctionSpec::polynomial(params.to_vec())
            }
            "exponential" => {
                arity(&[1, 2, 3])?;
                match *params {
                    [rate] => FunctionSpec::exponential(1.0, rate),
                    [scale, rate] => FunctionSpec::exponential(scale, rate),
                    [scale, rate, offset] => FunctionSpec::Exponential { scale, rate, offset },
                    _ => unreachable!(),
                }
            }
            "sinusoidal" => {
                arity(&[2, 3])?;
                let omega = params.get(2).copied().unwrap_or(1.0);
                FunctionSpec::sinusoidal(params[0], params[1], omega)
            }
            "sine_series" => {
                if params.is_empty() || params.len() % 2 != 0 {
                    return Err(Error::InvalidSpec("sine_series takes (coefficient, mode) pairs".into()));
                }
                let mut terms = Vec::with_capacity(params.len() / 2);
                for pair in params.chunks(2) {
                    let mode = pair[1];
                    if !(mode >= 1.0 && mode.fract() == 0.0 && mode <= u32::MAX as f64) {
                        return Err(Error::InvalidSpec(format!(
                            "sine mode index must be a positive integer, got {mode}"
                        )));
                    }
                    terms.push((pair[0], mode as u32));
                }
                FunctionSpec::sine_series(&terms)?
            }
            "table" => {
                if params.len() % 2 != 0 {
                    return Err(Error::InvalidSpec("table takes (x, y) pairs".into()));
                }
                let (xs, ys) = params.chunks(2).map(|p| (p[0], p[1])).unzip();
                FunctionSpec::table(xs, ys)?
            }
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown function kind `{other}` (expected one of {})",
                    Self::KINDS.join(", ")
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |vals: &[f64]| -> Result<()> {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::InvalidSpec("non-finite parameter".into()))
            }
        };
        match self {
            FunctionSpec::Constant { value } => finite(&[*value]),
            FunctionSpec::Polynomial { coefs } => finite(coefs),
            FunctionSpec::Exponential { scale, rate, offset } => finite(&[*scale, *rate, *offset]),
            FunctionSpec::Sinusoidal {
                offset,
                amplitude,
                omega,
            } => finite(&[*offset, *amplitude, *omega]),
            FunctionSpec::SineSeries { terms } => {
                let coefs: Vec<f64> = terms.iter().map(|t| t.coef).collect();
                finite(&coefs)?;
                let mut modes: Vec<u32> = terms.iter().map(|t| t.mode).collect();
                if modes.contains(&0) {
                    return Err(Error::InvalidSpec("sine mode indices must be >= 1".into()));
                }
                modes.sort_unstable();
                if modes.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidSpec("sine mode indices must be distinct".into()));
                }
                Ok(())
            }
            // Checked on construction.
            FunctionSpec::Table(_) => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            FunctionSpec::Constant { value } => *value,
            FunctionSpec::Polynomial { coefs } => coefs.iter().rev().fold(0.0, |acc, c| acc * s + c),
            FunctionSpec::Exponential { scale, rate, offset } => scale * (-rate * s).exp() + offset,
            FunctionSpec::Sinusoidal {
                offset,
                amplitude,
                omega,
            } => offset + amplitude * (omega * s).sin(),
            FunctionSpec::SineSeries { terms } => terms.iter().map(|t| t.coef * (t.mode as f64 * s).sin()).sum(),
            FunctionSpec::Table(table) => table.eval(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            FunctionSpec::Constant { .. } => 0.0,
            FunctionSpec::Polynomial { coefs } => coefs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * s + k as f64 * c),
            FunctionSpec::Exponential { scale, rate, .. } => -rate * scale * (-rate * s).exp(),
            FunctionSpec::Sinusoidal { amplitude, omega, .. } => amplitude * omega * (omega * s).cos(),
            FunctionSpec::SineSeries { terms } => terms
                .iter()
                .map(|t| {
                    let m = t.mode as f64;
                    t.coef * m * (m * s).cos()
                })
                .sum(),
            FunctionSpec::Table(table) => table.derivative(s),
        }
    }

    /// Fails unless the function is evaluable on all of `[lo, hi]`.
    pub fn check_domain(&self, lo: f64, hi: f64, name: &str) -> Result<()> {
        if let FunctionSpec::Table(table) = self {
            let (a, b) = table.domain();
            let slack = 1e-12 * (b - a).max(1.0);
            if a > lo + slack || b < hi - slack {
                return Err(Error::Evaluation(format!(
                    "{name}: sample table covers [{a}, {b}] but [{lo}, {hi}] is required"
                )));
            }
        }
        Ok(())
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            FunctionSpec::Constant { value } => *value == 0.0,
            FunctionSpec::Polynomial { coefs } => coefs.iter().all(|c| *c == 0.0),
            FunctionSpec::Exponential { scale, offset, .. } => *scale == 0.0 && *offset == 0.0,
            FunctionSpec::Sinusoidal { offset, amplitude, .. } => *offset == 0.0 && *amplitude == 0.0,
            FunctionSpec::SineSeries { terms } => terms.iter().all(|t| t.coef == 0.0),
            FunctionSpec::Table(table) => table.ys().iter().all(|y| *y == 0.0),
        }
    }
}

/// One separable term `space(x) * time(t)` of a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm {
    pub space: FunctionSpec,
    pub time: FunctionSpec,
}

/// Source `f(x, t)` as a finite sum of separable terms; empty means `f = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub terms: Vec<SourceTerm>,
}

impl SourceSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn separable(space: FunctionSpec, time: FunctionSpec) -> Self {
        Self {
            terms: vec![SourceTerm { space, time }],
        }
    }

    pub fn with_term(mut self, space: FunctionSpec, time: FunctionSpec) -> Self {
        self.terms.push(SourceTerm { space, time });
        self
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.space.eval(x) * term.time.eval(t))
            .sum()
    }
}
