//! Built-in observables with known Lebesgue means.
//!
//! The trig observables use half-period cosines. Full-period Fourier modes are
//! orthogonal to their images under y ↦ my mod 1, so their correlations only see exact
//! returns of the bracket walk and alternate with the parity of the lag; `wave` is kept
//! to exhibit that.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Eval = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Observable {
    name: String,
    arity: usize,
    mean: f64,
    holder: f64,
    eval: Eval,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("mean", &self.mean)
            .finish()
    }
}

const BUILTIN: &[&str] = &["one", "x", "y", "z", "trig1", "trig2", "trig3", "wave", "bump"];

impl Observable {
    /// `mean` must be the exact Lebesgue mean; estimators center with it.
    pub fn new<F>(name: &str, arity: usize, mean: f64, holder: f64, f: F) -> Self
    where
        F: Fn(&[f64; 3]) -> f64 + Send + Sync + 'static,
    {
        Observable {
            name: name.to_string(),
            arity,
            mean,
            holder,
            eval: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Observable::new("one", 2, c, 1.0, move |_| c)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        BUILTIN
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let o = match name {
            "one" => Observable::constant(1.0),
            "x" => Observable::new(name, 2, 0.5, 1.0, |p| p[0]),
            "y" => Observable::new(name, 2, 0.5, 1.0, |p| p[1]),
            "z" => Observable::new(name, 3, 0.5, 1.0, |p| p[2]),
            "trig1" => Observable::new(name, 2, 0.0, 1.0, |p| (PI * p[0]).cos() + (PI * p[1]).cos()),
            "trig2" => Observable::new(name, 2, 0.0, 1.0, |p| {
                ((PI * p[0]).cos() + 1.0) * (PI * p[1]).cos()
            }),
            "trig3" => Observable::new(name, 3, 0.0, 1.0, |p| {
                (PI * p[0]).cos() + (PI * p[1]).cos() + (PI * p[2]).cos()
            }),
            "wave" => Observable::new(name, 2, 0.0, 1.0, |p| {
                (TAU * p[0]).cos() + (TAU * p[1]).cos()
            }),
            "bump" => Observable::new(name, 2, 0.25, 1.0, |p| {
                (PI * p[0]).sin().powi(2) * (PI * p[1]).sin().powi(2)
            }),
            _ => return Err(Error::UnknownObservable(name.to_string())),
        };
        Ok(o)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// 2 for functions of (x, y), 3 when z is read.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder
    }

    pub fn eval(&self, p: &[f64; 3]) -> f64 {
        (self.eval)(p)
    }

    pub fn centered(&self, p: &[f64; 3]) -> f64 {
        (self.eval)(p) - self.mean
    }

    /// φ∘ι with ι(x, y, z) = (1 − z, 1 − y, 1 − x). ι preserves Lebesgue, so the mean is kept.
    pub fn compose_involution(&self) -> Observable {
        let inner = self.eval.clone();
        Observable {
            name: format!("{}∘ι", self.name),
            arity: 3,
            mean: self.mean,
            holder: self.holder,
            eval: Arc::new(move |p| inner(&[1.0 - p[2], 1.0 - p[1], 1.0 - p[0]])),
        }
    }

    /// Fails unless the observable can be evaluated on orbits of a map of dimension `dim`.
    pub fn check_arity(&self, dim: usize) -> Result<()> {
        if self.arity > dim {
            return Err(Error::ObservableArity {
                name: self.name.clone(),
                arity: self.arity,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule on a 3-D grid: exact for these trigonometric polynomials up to
    /// rounding, and within 1e-4 for the bump.
    fn grid_mean(o: &Observable) -> f64 {
        let n = 40;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = [
                        (i as f64 + 0.5) / n as f64,
                        (j as f64 + 0.5) / n as f64,
                        (k as f64 + 0.5) / n as f64,
                    ];
                    s += o.eval(&p);
                }
            }
        }
        s / (n * n * n) as f64
    }

    #[test]
    fn library_means_are_correct() {
        for name in Observable::builtin_names() {
            let o = Observable::builtin(name).unwrap();
            assert!((grid_mean(&o) - o.mean()).abs() < 1e-3, "{name}");
            let i = o.compose_involution();
            assert!((grid_mean(&i) - i.mean()).abs() < 1e-3, "{name}∘ι");
        }
    }

    #[test]
    fn involution_composition() {
        let z = Observable::builtin("x").unwrap().compose_involution();
        assert_eq!(z.eval(&[0.1, 0.2, 0.25]), 0.75);
        assert_eq!(z.arity(), 3);
    }

    #[test]
    fn unknown_names_and_arity() {
        assert!(Observable::builtin("nope").is_err());
        assert!(Observable::builtin("z").unwrap().check_arity(2).is_err());
        assert!(Observable::builtin("trig1").unwrap().check_arity(3).is_ok());
    }
}
