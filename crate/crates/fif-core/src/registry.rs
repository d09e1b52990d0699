//! Named example systems, each constructed exactly and paired with its
//! closed-form reference function when one exists. Entries are selected by
//! id with optional `name=value` parameters, the same grammar the CLI's
//! `--example` flag accepts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{
    ifs_from_analytic, ifs_from_data, Affine2D, AffineMap1D, BranchMap, DataNode,
    GeneralAffineIFS2D, InterpolationIFS, Interval,
};
use crate::scalar::ScalarFn;

/// Terms of the sine series beyond this index oscillate faster than double
/// precision can resolve the angle, so summation always stops here even if
/// the requested geometric tail has not been reached.
const SINE_SERIES_MAX_TERMS: usize = 54;

/// Closed-form reference function.
#[derive(Debug, Clone)]
pub enum Oracle {
    Scalar(ScalarFn),
    /// `f(x) = sum_k xi^k sin(2^{k+1} pi x)`, truncated once the geometric
    /// tail drops below 1e-12.
    SineSeries {
        xi: f64,
    },
}

impl Oracle {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Oracle::Scalar(f) => f.eval(x),
            Oracle::SineSeries { xi } => sine_series(*xi, x),
        }
    }
}

/// Partial sums of `sum_k xi^k sin(2^{k+1} pi x)` until the tail bound
/// `|xi|^k / (1 - |xi|)` is negligible.
pub fn sine_series(xi: f64, x: f64) -> f64 {
    let tail_factor = 1.0 / (1.0 - xi.abs());
    let mut sum = 0.0;
    let mut coef = 1.0f64;
    let mut freq = 2.0 * std::f64::consts::PI;
    for _ in 0..SINE_SERIES_MAX_TERMS {
        sum += coef * (freq * x).sin();
        coef *= xi;
        freq *= 2.0;
        if coef.abs() * tail_factor < 1e-12 {
            break;
        }
    }
    sum
}

/// The constructed system of an example: an interpolation IFS whose
/// attractor is a function graph, or a plain planar affine family.
#[derive(Debug, Clone)]
pub enum ExampleSystem {
    Interpolation(InterpolationIFS),
    Planar(GeneralAffineIFS2D),
}

impl ExampleSystem {
    /// The interpolation system, if this example has one.
    pub fn interpolation(&self) -> Option<&InterpolationIFS> {
        match self {
            ExampleSystem::Interpolation(ifs) => Some(ifs),
            ExampleSystem::Planar(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleEntry {
    pub id: String,
    pub system: ExampleSystem,
    pub oracle: Option<Oracle>,
    /// Where the oracle represents the attractor; defaults to the system
    /// domain when there is no oracle.
    pub oracle_domain: Interval,
    pub description: String,
    /// Parameter names with the values actually used.
    pub params: Vec<(String, f64)>,
}

impl ExampleEntry {
    /// Closed-form value at `x`. Series oracles accept any real argument;
    /// the rest are restricted to `oracle_domain`.
    pub fn oracle_value(&self, x: f64) -> Result<f64> {
        let oracle = self.oracle.as_ref().ok_or(Error::NoOracle)?;
        if matches!(oracle, Oracle::Scalar(_)) && !self.oracle_domain.contains(x) {
            return Err(Error::OutOfOracleDomain(
                x,
                self.oracle_domain.lo,
                self.oracle_domain.hi,
            ));
        }
        Ok(oracle.eval(x))
    }
}

/// One row of the example catalogue.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleInfo {
    pub id: &'static str,
    /// Tunable parameters and their defaults.
    pub params: &'static [(&'static str, f64)],
    pub description: &'static str,
}

pub fn list_examples() -> Vec<ExampleInfo> {
    vec![
        ExampleInfo {
            id: "parabola",
            params: &[],
            description: "two affine branches whose attractor is the graph of x^2 on [0, 1]",
        },
        ExampleInfo {
            id: "length-arc",
            params: &[("a", 0.5), ("c", 0.5), ("d1", 0.8), ("d2", 0.8)],
            description: "graph of infinite length when d1 + d2 > 1; its box dimension solves \
                          a^(D-1) d1 + (1-a)^(D-1) d2 = 1",
        },
        ExampleInfo {
            id: "once-diff",
            params: &[],
            description: "attractor differentiable everywhere with a discontinuous derivative, \
                          through (0,0), (2/3,1), (2,0)",
        },
        ExampleInfo {
            id: "c1-general-affine",
            params: &[],
            description: "planar affine pair (no interpolation structure) whose attractor is a \
                          continuously differentiable graph",
        },
        ExampleInfo {
            id: "weierstrass",
            params: &[("xi", 0.5)],
            description: "sinusoidal branches; the attractor is the sine series \
                          sum xi^k sin(2^(k+1) pi x), nowhere differentiable for xi >= 0.5",
        },
        ExampleInfo {
            id: "exp",
            params: &[],
            description: "conjugate construction from the exponential; attractor is the graph \
                          of e^x on [1, 2]",
        },
        ExampleInfo {
            id: "tent-family",
            params: &[("p", 0.3)],
            description: "tent interpolation through (0,0), (1,1), (2,0) with vertical scaling \
                          p; p = 0.25 has the closed form x(2 - x)",
        },
        ExampleInfo {
            id: "four-node",
            params: &[],
            description: "five data points with uniform vertical scaling 0.25",
        },
        ExampleInfo {
            id: "four-node-asym",
            params: &[],
            description: "five data points with scalings (0.55, 0.45, 0.45, 0.45)",
        },
    ]
}

/// Builds an example from an `id[:name=value,...]` selector.
pub fn get_example(selector: &str) -> Result<ExampleEntry> {
    let (id, mut params) = parse_selector(selector)?;
    let entry = match id.as_str() {
        "parabola" => ExampleEntry {
            id,
            system: ExampleSystem::Interpolation(ifs_from_data(
                &nodes(&[(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]),
                &[0.25, 0.25],
            )?),
            oracle: Some(Oracle::Scalar(ScalarFn::Poly(vec![0.0, 0.0, 1.0]))),
            oracle_domain: Interval::new(0.0, 1.0)?,
            description: describe("parabola"),
            params: Vec::new(),
        },
        "length-arc" => {
            let a = take(&mut params, "a", 0.5);
            let c = take(&mut params, "c", 0.5);
            let d1 = take(&mut params, "d1", 0.8);
            let d2 = take(&mut params, "d2", 0.8);
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::ParamOutOfRange(format!("a = {a} not in (0, 1)")));
            }
            for d in [d1, d2] {
                if !(d > 0.0 && d < 1.0) {
                    return Err(Error::ParamOutOfRange(format!("scaling {d} not in (0, 1)")));
                }
            }
            if !c.is_finite() {
                return Err(Error::ParamOutOfRange(format!("c = {c} not finite")));
            }
            // The middle node is the image of the right endpoint under the
            // first map, so the system interpolates it by construction.
            ExampleEntry {
                id,
                system: ExampleSystem::Interpolation(ifs_from_data(
                    &nodes(&[(0.0, 0.0), (2.0 * a, 2.0 * c), (2.0, 0.0)]),
                    &[d1, d2],
                )?),
                oracle: None,
                oracle_domain: Interval::new(0.0, 2.0)?,
                description: describe("length-arc"),
                params: vec![
                    ("a".into(), a),
                    ("c".into(), c),
                    ("d1".into(), d1),
                    ("d2".into(), d2),
                ],
            }
        }
        "once-diff" => ExampleEntry {
            id,
            system: ExampleSystem::Interpolation(ifs_from_data(
                &nodes(&[(0.0, 0.0), (2.0 / 3.0, 1.0), (2.0, 0.0)]),
                &[2.0 / 9.0, 2.0 / 9.0],
            )?),
            oracle: None,
            oracle_domain: Interval::new(0.0, 2.0)?,
            description: describe("once-diff"),
            params: Vec::new(),
        },
        "c1-general-affine" => ExampleEntry {
            id,
            system: ExampleSystem::Planar(GeneralAffineIFS2D::new(vec![
                Affine2D::new([[0.4, 0.2], [0.2, 0.4]], [0.0, 0.0]),
                Affine2D::new([[0.6, 0.0], [-0.2, 0.2]], [0.4, 0.2]),
            ])?),
            oracle: None,
            oracle_domain: Interval::new(0.0, 1.0)?,
            description: describe("c1-general-affine"),
            params: Vec::new(),
        },
        "weierstrass" => {
            let xi = take(&mut params, "xi", 0.5);
            if !xi.is_finite() || xi.abs() >= 1.0 {
                return Err(Error::ParamOutOfRange(format!(
                    "|xi| = {} must stay below 1 for the series to converge",
                    xi.abs()
                )));
            }
            let ifs = InterpolationIFS::new(
                nodes(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]),
                vec![AffineMap1D::new(0.5, 0.0), AffineMap1D::new(0.5, 0.5)],
                vec![
                    BranchMap::Sinusoidal { xi, sign: 1.0 },
                    BranchMap::Sinusoidal { xi, sign: -1.0 },
                ],
            )?;
            ExampleEntry {
                id,
                system: ExampleSystem::Interpolation(ifs),
                oracle: Some(Oracle::SineSeries { xi }),
                oracle_domain: Interval::new(0.0, 1.0)?,
                description: describe("weierstrass"),
                params: vec![("xi".into(), xi)],
            }
        }
        "exp" => ExampleEntry {
            id,
            system: ExampleSystem::Interpolation(ifs_from_analytic(
                &ScalarFn::Exp,
                Interval::new(1.0, 2.0)?,
            )?),
            oracle: Some(Oracle::Scalar(ScalarFn::Exp)),
            oracle_domain: Interval::new(1.0, 2.0)?,
            description: describe("exp"),
            params: Vec::new(),
        },
        "tent-family" => {
            let p = take(&mut params, "p", 0.3);
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::ParamOutOfRange(format!("p = {p} not in (0, 1)")));
            }
            let oracle = (p == 0.25).then(|| Oracle::Scalar(ScalarFn::Poly(vec![0.0, 2.0, -1.0])));
            ExampleEntry {
                id,
                system: ExampleSystem::Interpolation(ifs_from_data(
                    &nodes(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]),
                    &[p, p],
                )?),
                oracle,
                oracle_domain: Interval::new(0.0, 2.0)?,
                description: describe("tent-family"),
                params: vec![("p".into(), p)],
            }
        }
        "four-node" => ExampleEntry {
            id,
            system: ExampleSystem::Interpolation(ifs_from_data(
                &nodes(&[
                    (0.0, 0.25),
                    (0.25, 0.0),
                    (0.5, -0.25),
                    (0.75, 0.5),
                    (1.0, 0.25),
                ]),
                &[0.25, 0.25, 0.25, 0.25],
            )?),
            oracle: None,
            oracle_domain: Interval::new(0.0, 1.0)?,
            description: describe("four-node"),
            params: Vec::new(),
        },
        "four-node-asym" => ExampleEntry {
            id,
            system: ExampleSystem::Interpolation(ifs_from_data(
                &nodes(&[
                    (0.0, 0.25),
                    (0.25, 0.0),
                    (0.5, 0.15),
                    (0.75, 0.6),
                    (1.0, 0.25),
                ]),
                &[0.55, 0.45, 0.45, 0.45],
            )?),
            oracle: None,
            oracle_domain: Interval::new(0.0, 1.0)?,
            description: describe("four-node-asym"),
            params: Vec::new(),
        },
        other => return Err(Error::UnknownExample(other.to_string())),
    };
    finish(params, &entry.id)?;
    Ok(entry)
}

/// Closed-form value of an example's reference function at `x`.
pub fn oracle_eval(selector: &str, x: f64) -> Result<f64> {
    get_example(selector)?.oracle_value(x)
}

fn nodes(pts: &[(f64, f64)]) -> Vec<DataNode> {
    pts.iter().map(|&(x, y)| DataNode::new(x, y)).collect()
}

fn describe(id: &str) -> String {
    list_examples()
        .into_iter()
        .find(|e| e.id == id)
        .map(|e| e.description.to_string())
        .unwrap_or_default()
}

fn parse_selector(selector: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (id, rest) = match selector.split_once(':') {
        Some((id, rest)) => (id, rest),
        None => (selector, ""),
    };
    let mut params = Vec::new();
    for piece in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = piece.split_once('=').ok_or_else(|| {
            Error::ParamOutOfRange(format!(
                "malformed parameter `{piece}`, expected name=value"
            ))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::ParamOutOfRange(format!(
                "parameter {} has non-numeric value `{value}`",
                key.trim()
            ))
        })?;
        params.push((key.trim().to_string(), value));
    }
    Ok((id.trim().to_string(), params))
}

fn take(params: &mut Vec<(String, f64)>, name: &str, default: f64) -> f64 {
    match params.iter().position(|(k, _)| k == name) {
        Some(i) => params.remove(i).1,
        None => default,
    }
}

fn finish(params: Vec<(String, f64)>, id: &str) -> Result<()> {
    match params.into_iter().next() {
        Some((k, _)) => Err(Error::ParamOutOfRange(format!(
            "{id} has no parameter named {k}"
        ))),
        None => Ok(()),
    }
}
