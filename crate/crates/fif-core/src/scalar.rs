//! A small registry of closed-form real functions.
//!
//! [`ScalarFn`] is an evaluatable function object with an exact derivative
//! and, where the closed form allows it, a symbolic inverse. The analytic
//! IFS construction composes these objects instead of closing over `Fn`
//! pointers so systems stay inspectable, comparable and serializable.

use crate::error::{Error, Result};

/// Iterations used by the bisection fallback in [`ScalarFn::invert_monotone`].
/// 128 halvings push the bracket below one ulp for any f64 input.
const BISECT_ITERS: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    Identity,
    /// `scale * x + shift`
    Affine {
        scale: f64,
        shift: f64,
    },
    /// Coefficients in ascending degree order: `c[0] + c[1] x + c[2] x^2 + ...`
    Poly(Vec<f64>),
    Exp,
    Log,
    Sqrt,
    Sin,
    /// `factor * f(x)`
    Scaled(f64, Box<ScalarFn>),
    /// `f(x) + g(x)`
    Sum(Box<ScalarFn>, Box<ScalarFn>),
    /// `outer(inner(x))`
    Compose(Box<ScalarFn>, Box<ScalarFn>),
    /// Numeric inverse of a function that is strictly monotone on the
    /// bracket `[lo, hi]`. Evaluates by bisection.
    Inverse(Box<ScalarFn>, (f64, f64)),
}

impl ScalarFn {
    pub fn poly(coeffs: &[f64]) -> Self {
        ScalarFn::Poly(coeffs.to_vec())
    }

    pub fn affine(scale: f64, shift: f64) -> Self {
        ScalarFn::Affine { scale, shift }
    }

    pub fn compose(outer: ScalarFn, inner: ScalarFn) -> Self {
        ScalarFn::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Identity => x,
            ScalarFn::Affine { scale, shift } => scale * x + shift,
            ScalarFn::Poly(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            ScalarFn::Exp => x.exp(),
            ScalarFn::Log => x.ln(),
            ScalarFn::Sqrt => x.sqrt(),
            ScalarFn::Sin => x.sin(),
            ScalarFn::Scaled(k, f) => k * f.eval(x),
            ScalarFn::Sum(f, g) => f.eval(x) + g.eval(x),
            ScalarFn::Compose(outer, inner) => outer.eval(inner.eval(x)),
            ScalarFn::Inverse(f, bracket) => f.invert_monotone(x, *bracket).unwrap_or(f64::NAN),
        }
    }

    /// Exact derivative by the chain rule.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Identity => 1.0,
            ScalarFn::Affine { scale, .. } => *scale,
            ScalarFn::Poly(c) => {
                let mut acc = 0.0;
                for i in (1..c.len()).rev() {
                    acc = acc * x + c[i] * i as f64;
                }
                acc
            }
            ScalarFn::Exp => x.exp(),
            ScalarFn::Log => 1.0 / x,
            ScalarFn::Sqrt => 0.5 / x.sqrt(),
            ScalarFn::Sin => x.cos(),
            ScalarFn::Scaled(k, f) => k * f.derivative(x),
            ScalarFn::Sum(f, g) => f.derivative(x) + g.derivative(x),
            ScalarFn::Compose(outer, inner) => {
                outer.derivative(inner.eval(x)) * inner.derivative(x)
            }
            ScalarFn::Inverse(f, _) => {
                let y = self.eval(x);
                1.0 / f.derivative(y)
            }
        }
    }

    /// Symbolic inverse when the closed form has one.
    pub fn inverse_fn(&self) -> Option<ScalarFn> {
        match self {
            ScalarFn::Identity => Some(ScalarFn::Identity),
            ScalarFn::Affine { scale, shift } => {
                if *scale == 0.0 {
                    None
                } else {
                    Some(ScalarFn::Affine {
                        scale: 1.0 / scale,
                        shift: -shift / scale,
                    })
                }
            }
            ScalarFn::Poly(c) => match c.len() {
                0 | 1 => None,
                2 => ScalarFn::Affine {
                    scale: c[1],
                    shift: c[0],
                }
                .inverse_fn(),
                _ => None,
            },
            ScalarFn::Exp => Some(ScalarFn::Log),
            ScalarFn::Log => Some(ScalarFn::Exp),
            // Valid on the non-negative range that Sqrt produces.
            ScalarFn::Sqrt => Some(ScalarFn::poly(&[0.0, 0.0, 1.0])),
            ScalarFn::Sin => None,
            ScalarFn::Scaled(k, f) => {
                if *k == 0.0 {
                    return None;
                }
                let inner = f.inverse_fn()?;
                Some(ScalarFn::compose(inner, ScalarFn::affine(1.0 / k, 0.0)))
            }
            ScalarFn::Sum(..) => None,
            ScalarFn::Compose(outer, inner) => {
                let oi = outer.inverse_fn()?;
                let ii = inner.inverse_fn()?;
                Some(ScalarFn::compose(ii, oi))
            }
            ScalarFn::Inverse(f, _) => Some((**f).clone()),
        }
    }

    /// Solves `self(t) = y` for `t` in `[lo, hi]` assuming strict
    /// monotonicity there. Falls back from an endpoint bracket check.
    pub fn invert_monotone(&self, y: f64, (lo, hi): (f64, f64)) -> Result<f64> {
        let (flo, fhi) = (self.eval(lo), self.eval(hi));
        let increasing = fhi > flo;
        let (ylo, yhi) = if increasing { (flo, fhi) } else { (fhi, flo) };
        if !(ylo..=yhi).contains(&y) {
            return Err(Error::OutsideValidityStrip {
                value: y,
                lo: ylo,
                hi: yhi,
            });
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = self.eval(mid);
            if (fm < y) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// The range of values the function can produce, used as the validity
    /// strip of inverse branch maps. Conservative for sums: those fall back
    /// to the whole line and rely on runtime bracket checks instead.
    pub fn natural_range(&self) -> (f64, f64) {
        match self {
            ScalarFn::Identity | ScalarFn::Log | ScalarFn::Sum(..) => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            ScalarFn::Affine { scale, shift } => {
                if *scale == 0.0 {
                    (*shift, *shift)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            ScalarFn::Poly(c) => {
                if c.len() == 3 && c[0] == 0.0 && c[1] == 0.0 {
                    // Squaring as the inverse of Sqrt: non-negative inputs.
                    (0.0, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            ScalarFn::Exp => (0.0, f64::INFINITY),
            ScalarFn::Sqrt => (0.0, f64::INFINITY),
            ScalarFn::Sin => (-1.0, 1.0),
            ScalarFn::Scaled(k, f) => {
                let (lo, hi) = f.natural_range();
                let (a, b) = (k * lo, k * hi);
                (a.min(b), a.max(b))
            }
            ScalarFn::Compose(outer, _) => outer.natural_range(),
            ScalarFn::Inverse(_, (lo, hi)) => (lo.min(*hi), lo.max(*hi)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_eval_and_derivative() {
        let f = ScalarFn::poly(&[1.0, -2.0, 3.0]); // 1 - 2x + 3x^2
        assert_eq!(f.eval(2.0), 9.0);
        assert_eq!(f.derivative(2.0), 10.0);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let cases = [
            ScalarFn::Exp,
            ScalarFn::Sqrt,
            ScalarFn::Sin,
            ScalarFn::poly(&[0.5, 1.5, -0.25, 2.0]),
            ScalarFn::compose(ScalarFn::Exp, ScalarFn::affine(0.5, 0.5)),
            ScalarFn::Sum(
                Box::new(ScalarFn::Exp),
                Box::new(ScalarFn::Scaled(3.0, Box::new(ScalarFn::Identity))),
            ),
        ];
        for f in &cases {
            for i in 0..20 {
                let x = 0.3 + 0.12 * i as f64;
                let h = 1e-6;
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                let exact = f.derivative(x);
                assert!(
                    (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "derivative mismatch for {f:?} at {x}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn symbolic_inverse_round_trips() {
        let f = ScalarFn::compose(ScalarFn::Exp, ScalarFn::affine(0.5, 0.5));
        let inv = f.inverse_fn().unwrap();
        for i in 1..10 {
            let x = i as f64 * 0.37;
            let y = f.eval(x);
            assert!((inv.eval(y) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_inverse_round_trips() {
        // exp(4x) + 32x has no closed-form inverse.
        let g = ScalarFn::Sum(
            Box::new(ScalarFn::compose(ScalarFn::Exp, ScalarFn::affine(4.0, 0.0))),
            Box::new(ScalarFn::Scaled(32.0, Box::new(ScalarFn::Identity))),
        );
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let y = g.eval(x);
            let back = g.invert_monotone(y, (0.0, 1.0)).unwrap();
            assert!((back - x).abs() < 1e-12, "{back} vs {x}");
        }
    }

    #[test]
    fn numeric_inverse_rejects_values_outside_bracket_image() {
        let g = ScalarFn::Exp;
        assert!(g.invert_monotone(100.0, (0.0, 1.0)).is_err());
    }
}
