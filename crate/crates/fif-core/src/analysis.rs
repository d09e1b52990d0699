//! Regularity and geometry analysis: double points, address coding, a
//! certified Lipschitz constant, the pointwise derivative series, dimension
//! computations, and an empirical probe of how much of the continuation
//! structure is pinned down by the attractor alone.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::attractor::{self, ChaosGameParams, EVAL_DEPTH_DEFAULT};
use crate::continuation::{self, Address};
use crate::error::{Error, Result};
use crate::ifs::{AffineMap1D, BranchMap, DataNode, InterpolationIFS, Interval, TriAffine};

/// Two descent coordinates closer than this count as the same point when
/// detecting double points. Images of nodes under dyadic x-maps are computed
/// exactly; the tolerance covers non-dyadic slopes.
pub const DOUBLE_TOL: f64 = 1e-12;

/// Descent steps screened for interior-node hits before an address is
/// trusted to be unique.
const DOUBLE_CHECK_DEPTH: usize = 60;

/// Hard cap on enumerated double points.
const DOUBLE_POINT_CAP: u64 = 4_000_000;

/// Hard cap on derivative-series terms. Unreachable for reasonable
/// tolerances once the hypothesis check has certified a geometric tail,
/// but it keeps a typo in `tol` from looping forever.
const SERIES_CAP: usize = 200_000;

/// Points with two distinct branch addresses: the images of the interior
/// nodes under x-map words of length at most `depth`. The endpoints are
/// excluded; they have unique constant addresses.
#[derive(Debug, Clone, Serialize)]
pub struct DoublePointSet {
    pub depth: usize,
    /// Strictly increasing, all strictly inside the domain.
    pub xs: Vec<f64>,
}

/// Enumerates double points exactly. The sets grow with `depth` and their
/// union over all depths is dense in the domain, so callers keep `depth`
/// small; the enumeration refuses to produce more than a few million points.
pub fn double_points(ifs: &InterpolationIFS, depth: usize) -> Result<DoublePointSet> {
    let n = ifs.n_branches() as u64;
    let junctions = ifs.nodes().len() as u64 - 2;
    let mut total: u64 = 0;
    let mut level_size = junctions;
    for _ in 0..=depth {
        total = total.saturating_add(level_size);
        if total > DOUBLE_POINT_CAP {
            return Err(Error::EnsembleTooLarge(total as u128, DOUBLE_POINT_CAP));
        }
        level_size = level_size.saturating_mul(n);
    }

    let mut level: Vec<f64> = ifs.nodes()[1..ifs.nodes().len() - 1]
        .iter()
        .map(|p| p.x)
        .collect();
    let mut xs = level.clone();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * n as usize);
        for &x in &level {
            for b in 1..=ifs.n_branches() {
                next.push(ifs.l_map(b).apply(x));
            }
        }
        xs.extend_from_slice(&next);
        level = next;
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|later, kept| (*later - *kept).abs() <= DOUBLE_TOL);
    let dom = ifs.domain();
    xs.retain(|&x| x > dom.lo && x < dom.hi);
    Ok(DoublePointSet { depth, xs })
}

/// Outcome of coding a point by subinterval descent: the branch word of the
/// requested length, or the step at which the descent landed on an interior
/// node, marking a point with two addresses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Coding {
    Word(Vec<usize>),
    DoublePoint { at_step: usize },
}

/// Codes `x` greedily: each step records the branch whose subinterval
/// contains the current coordinate and maps it back through that branch's
/// x-map. Node hits are flagged within [`DOUBLE_TOL`].
pub fn address_of(ifs: &InterpolationIFS, x: f64, depth: usize) -> Result<Coding> {
    let dom = ifs.domain();
    if !dom.contains(x) {
        return Err(Error::OutOfDomain(x, dom.lo, dom.hi));
    }
    let nodes = ifs.nodes();
    let interior = &nodes[1..nodes.len() - 1];
    let mut word = Vec::with_capacity(depth);
    let mut t = x;
    for step in 0..depth {
        if interior.iter().any(|p| (p.x - t).abs() <= DOUBLE_TOL) {
            return Ok(Coding::DoublePoint { at_step: step });
        }
        let n = ifs.branch_containing(t);
        word.push(n);
        t = ifs.l_map(n).invert(t).clamp(dom.lo, dom.hi);
    }
    Ok(Coding::Word(word))
}

/// All branch addresses of `x` to the given length. Points whose preimage
/// descent hits an interior node exactly have two addresses (the lower
/// branch continues with the top branch repeated, the upper with the bottom
/// one); all other points have one. Unlike [`address_of`] this matches nodes
/// exactly, so it is the right tool for dyadic test oracles rather than for
/// screening arbitrary coordinates.
pub fn addresses_of(ifs: &InterpolationIFS, x: f64, len: usize) -> Result<Vec<Vec<usize>>> {
    let dom = ifs.domain();
    if !dom.contains(x) {
        return Err(Error::OutOfDomain(x, dom.lo, dom.hi));
    }
    let nodes = ifs.nodes();
    let interior = &nodes[1..nodes.len() - 1];
    let mut primary = Vec::with_capacity(len);
    let mut alternate: Option<Vec<usize>> = None;
    let mut t = x;
    for _ in 0..len {
        if alternate.is_none() {
            if let Some(m) = interior.iter().position(|p| p.x == t) {
                // t is the junction between branches m+1 and m+2.
                let mut alt = primary.clone();
                alt.push(m + 2);
                alt.resize(len, 1);
                alternate = Some(alt);
            }
        }
        let n = ifs.branch_containing(t);
        primary.push(n);
        t = ifs.l_map(n).invert(t).clamp(dom.lo, dom.hi);
    }
    let mut out = vec![primary];
    out.extend(alternate);
    Ok(out)
}

/// A certified global Lipschitz constant for the interpolation function.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LipschitzBound {
    /// `c_sup / (a_min (1 - d_sup))`.
    pub lambda: f64,
    pub a_min: f64,
    /// Largest sup of `|dF_n/dx|` over branches.
    pub c_sup: f64,
    /// Largest ratio `sup|dF_n/dy| / a_n` over branches; below one or the
    /// bound does not exist.
    pub d_sup: f64,
}

/// Computes the Lipschitz certificate. Requires every branch's vertical
/// derivative to stay below its x-map slope in ratio; systems violating
/// that (graphs of dimension above one) have no finite Lipschitz constant
/// of this form.
pub fn lipschitz_bound(ifs: &InterpolationIFS) -> Result<LipschitzBound> {
    let mut c_sup = 0.0f64;
    let mut d_sup = 0.0f64;
    for n in 1..=ifs.n_branches() {
        let (cx, cy) = ifs.branch_derivative_bounds(n);
        c_sup = c_sup.max(cx);
        d_sup = d_sup.max(cy / ifs.l_map(n).a);
    }
    if d_sup >= 1.0 {
        return Err(Error::HypothesisViolated(format!(
            "no d < 1 with sup|dF_n/dy| <= d a_n for all branches: worst ratio {d_sup}"
        )));
    }
    let a_min = ifs.min_a();
    Ok(LipschitzBound {
        lambda: c_sup / (a_min * (1.0 - d_sup)),
        a_min,
        c_sup,
        d_sup,
    })
}

/// The derivative of the interpolation function at a non-double point,
/// summed from the branch partial derivatives along the address of `x`:
/// term m is `(dF/dx / a)` at the m-th descent point times the product of
/// `(dF/dy / a)` over the earlier steps. The descent contracts those
/// products geometrically, and summation stops once the certified tail
/// drops below `tol`.
pub fn derivative_series(ifs: &InterpolationIFS, x: f64, tol: f64) -> Result<f64> {
    let dom = ifs.domain();
    if !dom.contains(x) {
        return Err(Error::OutOfDomain(x, dom.lo, dom.hi));
    }

    // Certify the geometric tail: every branch must contract vertically
    // faster than its x-map shrinks horizontally.
    let mut rho = 0.0f64;
    let mut c_sup = 0.0f64;
    for n in 1..=ifs.n_branches() {
        let (cx, cy) = ifs.branch_derivative_bounds(n);
        let ratio = cy / ifs.l_map(n).a;
        if ratio >= 1.0 {
            return Err(Error::HypothesisViolated(format!(
                "branch {n}: sup|dF/dy| = {cy} is not below the x-slope {}",
                ifs.l_map(n).a
            )));
        }
        rho = rho.max(ratio);
        c_sup = c_sup.max(cx);
    }

    // Double points carry two addresses and no two-sided derivative.
    let nodes = ifs.nodes();
    let interior = &nodes[1..nodes.len() - 1];
    let mut t = x;
    for step in 0..DOUBLE_CHECK_DEPTH {
        if interior.iter().any(|p| (p.x - t).abs() <= DOUBLE_TOL) {
            return Err(Error::DoublePoint { x, depth: step });
        }
        let n = ifs.branch_containing(t);
        t = ifs.l_map(n).invert(t).clamp(dom.lo, dom.hi);
    }

    let a_min = ifs.min_a();
    let mut sum = 0.0f64;
    let mut product = 1.0f64;
    let mut t = x;
    for _ in 0..SERIES_CAP {
        let n = ifs.branch_containing(t);
        let branch = ifs.branch(n);
        let y = if branch.is_affine() {
            0.0
        } else {
            attractor::evaluate(ifs, t, EVAL_DEPTH_DEFAULT)?
        };
        let a = ifs.l_map(n).a;
        sum += branch.dx(t, y) / a * product;
        product *= branch.dy(t, y) / a;
        if c_sup / a_min * product.abs() / (1.0 - rho) < tol {
            return Ok(sum);
        }
        t = ifs.l_map(n).invert(t).clamp(dom.lo, dom.hi);
    }
    Err(Error::ConditionViolated(format!(
        "derivative series still above tolerance {tol} after {SERIES_CAP} terms"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionMethod {
    EquationSolve,
    BoxCount,
}

/// A dimension value and how it was obtained. `residual` holds the defining
/// equation's residual for [`DimensionMethod::EquationSolve`] and the
/// log-log fit R² for [`DimensionMethod::BoxCount`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DimensionResult {
    pub value: f64,
    pub method: DimensionMethod,
    pub residual: f64,
    /// Set when the vertical scalings sum to exactly one, where the
    /// dimension equation collapses to the rectifiable value 1.
    pub degenerate: bool,
}

/// Solves `a1^{D-1} d1 + (1-a1)^{D-1} d2 = 1` for `D` in (1, 2). The left
/// side is strictly decreasing in `D`, so bisection converges
/// unconditionally whenever `d1 + d2 > 1`; a sum of exactly one is the
/// degenerate dimension-1 boundary and anything below has no root above 1.
pub fn dimension_solve(a1: f64, d1: f64, d2: f64) -> Result<DimensionResult> {
    if !(a1 > 0.0 && a1 < 1.0) {
        return Err(Error::ParamOutOfRange(format!("a1 = {a1} not in (0, 1)")));
    }
    for d in [d1, d2] {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "vertical scaling {d} not in (0, 1)"
            )));
        }
    }
    if d1 + d2 == 1.0 {
        return Ok(DimensionResult {
            value: 1.0,
            method: DimensionMethod::EquationSolve,
            residual: 0.0,
            degenerate: true,
        });
    }
    if d1 + d2 < 1.0 {
        return Err(Error::ConditionViolated(format!(
            "d1 + d2 = {} is below one; the dimension equation has no root above one",
            d1 + d2
        )));
    }
    let g = |dim: f64| a1.powf(dim - 1.0) * d1 + (1.0 - a1).powf(dim - 1.0) * d2 - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    Ok(DimensionResult {
        value,
        method: DimensionMethod::EquationSolve,
        residual: g(value).abs(),
        degenerate: false,
    })
}

/// Box-counting dimension estimate of a point cloud over the dyadic scales
/// `2^{-j}` for `j` in `scale_exponents`, fit by least squares in log-log.
/// Unreliable scales are dropped from the fit at both ends: coarse ones
/// occupying fewer than 32 boxes (saturation), and fine ones averaging
/// fewer than 10 points per occupied box, where the sample misses boxes
/// the attractor reaches and the count flattens artificially.
pub fn box_dimension(
    cloud: &[(f64, f64)],
    scale_exponents: std::ops::RangeInclusive<u32>,
) -> Result<DimensionResult> {
    const MIN_POINTS: usize = 100_000;
    const MIN_SCALES: usize = 4;
    const MIN_BOXES: usize = 32;
    const MIN_OCCUPANCY: usize = 10;
    if cloud.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            actual: cloud.len(),
            required: MIN_POINTS,
        });
    }
    let scales: Vec<u32> = scale_exponents.collect();
    if scales.len() < MIN_SCALES {
        return Err(Error::TooFewScales {
            actual: scales.len(),
            required: MIN_SCALES,
        });
    }

    let counts: Vec<(u32, usize)> = scales
        .par_iter()
        .map(|&j| {
            let inv = (1u64 << j) as f64;
            let mut boxes: HashSet<(i64, i64)> = HashSet::new();
            for &(x, y) in cloud {
                boxes.insert(((x * inv).floor() as i64, (y * inv).floor() as i64));
            }
            (j, boxes.len())
        })
        .collect();

    let samples: Vec<(f64, f64)> = counts
        .iter()
        .filter(|&&(_, c)| c >= MIN_BOXES && c * MIN_OCCUPANCY <= cloud.len())
        .map(|&(j, c)| (j as f64 * std::f64::consts::LN_2, (c as f64).ln()))
        .collect();
    if samples.len() < 2 {
        return Err(Error::TooFewScales {
            actual: samples.len(),
            required: 2,
        });
    }

    let n = samples.len() as f64;
    let mx = samples.iter().map(|p| p.0).sum::<f64>() / n;
    let my = samples.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = samples.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = samples.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let slope = sxy / sxx;
    let ss_tot = samples.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>();
    let ss_res = samples
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
        .sum::<f64>();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DimensionResult {
        value: slope,
        method: DimensionMethod::BoxCount,
        residual: r2,
        degenerate: false,
    })
}

/// The IFS whose branches are all `order`-fold compositions of the branches
/// of `ifs`, in lexicographic word order with the leftmost symbol outermost.
/// The attractor is unchanged; the node list refines the interpolation grid
/// with the graph points picked out by each word.
pub fn compose_ifs(ifs: &InterpolationIFS, order: usize) -> Result<InterpolationIFS> {
    if !(1..=3).contains(&order) {
        return Err(Error::ParamOutOfRange(format!(
            "composition order {order} not in 1..=3"
        )));
    }
    for n in 1..=ifs.n_branches() {
        if !ifs.branch(n).is_affine() {
            return Err(Error::NonAffineUnsupported);
        }
    }
    let words = continuation::ensemble_words(ifs.n_branches(), order)?;
    let first = ifs.nodes()[0];
    let last = *ifs.nodes().last().expect("validated node list");
    let mut nodes = Vec::with_capacity(words.len() + 1);
    let mut l_maps = Vec::with_capacity(words.len());
    let mut branches = Vec::with_capacity(words.len());
    for w in &words {
        let mut tri = TriAffine::identity();
        for &s in w {
            tri = tri.compose(&TriAffine::of(ifs.l_map(s), ifs.branch(s)));
        }
        nodes.push({
            let (x, y) = tri.apply(first.x, first.y);
            DataNode::new(x, y)
        });
        l_maps.push(AffineMap1D::new(tri.a, tri.b));
        branches.push(BranchMap::Affine {
            c: tri.c,
            d: tri.d,
            e: tri.e,
        });
    }
    nodes.push(DataNode::new(last.x, last.y));
    InterpolationIFS::new(nodes, l_maps, branches)
}

/// Outcome of probing two systems that share an attractor for agreement of
/// their continuation structure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniquenessReport {
    /// Hausdorff distance between the two attractor clouds.
    pub attractor_gap: f64,
    /// Largest value gap along the all-bottom-branch address on the shared
    /// grid.
    pub max_gap_theta1: f64,
    /// Largest value gap along the all-top-branch address.
    #[serde(rename = "max_gap_thetaN")]
    pub max_gap_theta_n: f64,
    /// Symmetric Hausdorff distance between the order-k continuation
    /// ensembles, both clipped to the x-window they jointly cover. The
    /// constant-address gaps above are forced toward zero by shared
    /// attractors; this one is not, and is reported for study.
    pub ensemble_gap: f64,
}

const PROBE_POINTS: usize = 100_000;
const PROBE_SEED: u64 = 0x5EED;
const ATTRACTOR_GAP_MAX: f64 = 2e-2;
const ENSEMBLE_POINTS_PER_PREFIX: usize = 5_000;

/// Compares the continuations of two systems along the constant addresses,
/// on `grid` points spanning the intersection of their order-`k` domains,
/// after first checking empirically that the attractors agree.
pub fn uniqueness_probe(
    ifs_a: &InterpolationIFS,
    ifs_b: &InterpolationIFS,
    grid: usize,
    k: usize,
) -> Result<UniquenessReport> {
    let params = ChaosGameParams::new(PROBE_POINTS, PROBE_SEED);
    let cloud_a = attractor::chaos_game(ifs_a, &params)?;
    let cloud_b = attractor::chaos_game(ifs_b, &params)?;
    let attractor_gap = attractor::hausdorff_distance(&cloud_a, &cloud_b)?;
    if attractor_gap > ATTRACTOR_GAP_MAX {
        return Err(Error::AttractorsDiffer(attractor_gap, ATTRACTOR_GAP_MAX));
    }

    let cap = k + 8;
    let gap_along = |sym_a: usize, sym_b: usize| -> Result<f64> {
        let th_a = Address::periodic(Vec::new(), vec![sym_a]);
        let th_b = Address::periodic(Vec::new(), vec![sym_b]);
        let dom_a = continuation::domain_interval(ifs_a, &th_a, k)?;
        let dom_b = continuation::domain_interval(ifs_b, &th_b, k)?;
        let shared = dom_a.intersect(&dom_b).ok_or(Error::DegenerateInterval(
            dom_a.lo.max(dom_b.lo),
            dom_a.hi.min(dom_b.hi),
        ))?;
        shared
            .linspace(grid.max(2))
            .par_iter()
            .map(|&x| -> Result<f64> {
                let va = continuation::continue_eval(ifs_a, &th_a, x, cap)?.value;
                let vb = continuation::continue_eval(ifs_b, &th_b, x, cap)?.value;
                Ok((va - vb).abs())
            })
            .try_reduce(|| 0.0, |m, v| Ok(m.max(v)))
    };
    let max_gap_theta1 = gap_along(1, 1)?;
    let max_gap_theta_n = gap_along(ifs_a.n_branches(), ifs_b.n_branches())?;

    let ensemble = |ifs: &InterpolationIFS| -> Result<(Vec<(f64, f64)>, Interval)> {
        let words = continuation::ensemble_words(ifs.n_branches(), k)?;
        let params = ChaosGameParams::new(ENSEMBLE_POINTS_PER_PREFIX, PROBE_SEED);
        let mut cloud = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for w in &words {
            let theta = Address::finite(w.clone());
            let iv = continuation::domain_interval(ifs, &theta, k)?;
            lo = lo.min(iv.lo);
            hi = hi.max(iv.hi);
            cloud.extend(continuation::continuation_cloud(ifs, &theta, k, &params)?);
        }
        Ok((cloud, Interval::unbounded(lo, hi)))
    };
    let (ens_a, ext_a) = ensemble(ifs_a)?;
    let (ens_b, ext_b) = ensemble(ifs_b)?;
    let window = ext_a.intersect(&ext_b).unwrap_or(ifs_a.domain());
    let clip = |cloud: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        cloud
            .into_iter()
            .filter(|&(x, _)| window.contains(x))
            .collect()
    };
    let ensemble_gap = attractor::hausdorff_distance(&clip(ens_a), &clip(ens_b))?;

    Ok(UniquenessReport {
        attractor_gap,
        max_gap_theta1,
        max_gap_theta_n,
        ensemble_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::ifs_from_data;

    fn nodes(pts: &[(f64, f64)]) -> Vec<DataNode> {
        pts.iter().map(|&(x, y)| DataNode::new(x, y)).collect()
    }

    fn parabola() -> InterpolationIFS {
        ifs_from_data(
            &nodes(&[(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]),
            &[0.25, 0.25],
        )
        .unwrap()
    }

    fn tent(p: f64) -> InterpolationIFS {
        ifs_from_data(&nodes(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]), &[p, p]).unwrap()
    }

    fn once_diff() -> InterpolationIFS {
        ifs_from_data(
            &nodes(&[(0.0, 0.0), (2.0 / 3.0, 1.0), (2.0, 0.0)]),
            &[2.0 / 9.0, 2.0 / 9.0],
        )
        .unwrap()
    }

    fn line() -> InterpolationIFS {
        ifs_from_data(&nodes(&[(0.0, 0.0), (1.0, 1.0)]), &[0.0]).unwrap()
    }

    #[test]
    fn double_points_enumerate_exactly() {
        let ifs = parabola();
        assert_eq!(double_points(&ifs, 0).unwrap().xs, vec![0.5]);
        assert_eq!(double_points(&ifs, 1).unwrap().xs, vec![0.25, 0.5, 0.75]);
        let d2 = double_points(&ifs, 2).unwrap();
        assert_eq!(d2.xs, vec![0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875]);
        for &x in &double_points(&ifs, 1).unwrap().xs {
            assert!(d2.xs.contains(&x), "depth sets must be nested");
        }
    }

    #[test]
    fn double_points_stay_interior_and_sorted() {
        let ifs = tent(0.3);
        let set = double_points(&ifs, 5).unwrap();
        let dom = ifs.domain();
        for w in set.xs.windows(2) {
            assert!(w[0] < w[1]);
        }
        for &x in &set.xs {
            assert!(x > dom.lo && x < dom.hi);
        }
    }

    #[test]
    fn address_coding_flags_double_points() {
        let ifs = parabola();
        assert_eq!(
            address_of(&ifs, 0.5, 8).unwrap(),
            Coding::DoublePoint { at_step: 0 }
        );
        assert_eq!(
            address_of(&ifs, 0.25, 8).unwrap(),
            Coding::DoublePoint { at_step: 1 }
        );
        assert_eq!(
            address_of(&ifs, 0.0, 4).unwrap(),
            Coding::Word(vec![1, 1, 1, 1])
        );
        assert_eq!(
            address_of(&ifs, 1.0 / 3.0, 6).unwrap(),
            Coding::Word(vec![1, 2, 1, 2, 1, 2])
        );
        assert!(matches!(
            address_of(&ifs, 2.0, 4),
            Err(Error::OutOfDomain(..))
        ));
    }

    #[test]
    fn address_word_recomposes_to_the_point() {
        let ifs = tent(0.3);
        let depth = 30;
        for &x in &[2.0 / 3.0, 0.1234, 1.9, 0.777] {
            let word = match address_of(&ifs, x, depth).unwrap() {
                Coding::Word(w) => w,
                other => panic!("unexpected coding {other:?} for x = {x}"),
            };
            // Applying the maps along the word, innermost last, contracts any
            // start point onto x.
            let mut t = ifs.domain().midpoint();
            for &n in word.iter().rev() {
                t = ifs.l_map(n).apply(t);
            }
            let bound = ifs.max_a().powi(depth as i32) * ifs.domain().len();
            assert!((t - x).abs() <= bound, "x = {x}: |{t} - {x}| > {bound}");
        }
    }

    #[test]
    fn both_addresses_of_a_junction() {
        let ifs = parabola();
        let addrs = addresses_of(&ifs, 0.5, 6).unwrap();
        assert_eq!(addrs, vec![vec![1, 2, 2, 2, 2, 2], vec![2, 1, 1, 1, 1, 1]]);
        let addrs = addresses_of(&ifs, 0.25, 6).unwrap();
        assert_eq!(addrs, vec![vec![1, 1, 2, 2, 2, 2], vec![1, 2, 1, 1, 1, 1]]);
        assert_eq!(addresses_of(&ifs, 0.0, 4).unwrap(), vec![vec![1, 1, 1, 1]]);
        assert_eq!(addresses_of(&ifs, 1.0, 4).unwrap(), vec![vec![2, 2, 2, 2]]);
        for &x in &double_points(&ifs, 2).unwrap().xs {
            assert_eq!(addresses_of(&ifs, x, 8).unwrap().len(), 2, "x = {x}");
        }
    }

    #[test]
    fn lipschitz_certificate_for_the_tent_family() {
        let b = lipschitz_bound(&tent(0.3)).unwrap();
        assert_eq!(b.c_sup, 0.5);
        assert_eq!(b.a_min, 0.5);
        assert!((b.d_sup - 0.6).abs() < 1e-15);
        assert!((b.lambda - 2.5).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_certificate_is_exact_for_a_line() {
        let b = lipschitz_bound(&line()).unwrap();
        assert_eq!(b.c_sup, 1.0);
        assert_eq!(b.d_sup, 0.0);
        assert_eq!(b.a_min, 1.0);
        assert_eq!(b.lambda, 1.0);
    }

    #[test]
    fn lipschitz_hypothesis_fails_for_steep_scalings() {
        assert!(matches!(
            lipschitz_bound(&tent(0.8)),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn sampled_chords_respect_the_lipschitz_bound() {
        let ifs = tent(0.3);
        let b = lipschitz_bound(&ifs).unwrap();
        let mut state = 0x2468_ACE0_1357_9BDFu64;
        let mut rand = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let s = 2.0 * rand();
            let t = 2.0 * rand();
            if (s - t).abs() < 1e-9 {
                continue;
            }
            let fs = attractor::evaluate(&ifs, s, 50).unwrap();
            let ft = attractor::evaluate(&ifs, t, 50).unwrap();
            assert!(
                (fs - ft).abs() <= (b.lambda + 1e-6) * (s - t).abs(),
                "chord through {s}, {t} steeper than {}",
                b.lambda
            );
        }
    }

    #[test]
    fn derivative_series_closed_form_at_the_left_endpoint() {
        // Descending from x = 0 repeats branch 1 forever, so the series is
        // geometric: (c/a) / (1 - d/a) = c / (a - d) = 0.5 / (1/3 - 2/9).
        let d = derivative_series(&once_diff(), 0.0, 1e-14).unwrap();
        assert!((d - 4.5).abs() < 1e-10, "f'(0) = {d}");
    }

    #[test]
    fn derivative_series_of_a_line_is_one() {
        assert_eq!(derivative_series(&line(), 0.3, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn derivative_series_matches_finite_differences() {
        let ifs = once_diff();
        let h = 1e-6;
        for &x in &[0.7, 0.31, 1.37] {
            let series = derivative_series(&ifs, x, 1e-12).unwrap();
            let fd = (attractor::evaluate(&ifs, x + h, 60).unwrap()
                - attractor::evaluate(&ifs, x - h, 60).unwrap())
                / (2.0 * h);
            assert!(
                (series - fd).abs() < 1e-3,
                "x = {x}: series {series} vs finite difference {fd}"
            );
        }
    }

    #[test]
    fn derivative_series_truncation_is_stable() {
        let ifs = once_diff();
        let coarse = derivative_series(&ifs, 0.7, 1e-6).unwrap();
        let fine = derivative_series(&ifs, 0.7, 1e-12).unwrap();
        assert!((coarse - fine).abs() <= 2e-6);
    }

    #[test]
    fn derivative_series_rejects_double_points_and_steep_systems() {
        assert!(matches!(
            derivative_series(&once_diff(), 2.0 / 3.0, 1e-10),
            Err(Error::DoublePoint { .. })
        ));
        // An image of the interior node, caught deeper in the descent.
        let junction_image = once_diff().l_map(1).apply(2.0 / 3.0);
        assert!(matches!(
            derivative_series(&once_diff(), junction_image, 1e-10),
            Err(Error::DoublePoint { .. })
        ));
        assert!(matches!(
            derivative_series(&tent(0.8), 0.3, 1e-10),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn dimension_equation_solved_to_closed_forms() {
        let sym = dimension_solve(0.5, 0.8, 0.8).unwrap();
        let expected = 2.0 - (1.25f64).ln() / 2.0f64.ln();
        assert!((sym.value - expected).abs() < 1e-10);
        assert!(sym.residual <= 1e-12);
        assert!(!sym.degenerate);

        let asym = dimension_solve(0.5, 0.6, 0.9).unwrap();
        let expected = 1.0 + (1.5f64).ln() / 2.0f64.ln();
        assert!((asym.value - expected).abs() < 1e-10);

        let uneven = dimension_solve(0.3, 0.7, 0.6).unwrap();
        let g = |dim: f64| 0.3f64.powf(dim - 1.0) * 0.7 + 0.7f64.powf(dim - 1.0) * 0.6 - 1.0;
        assert!(g(uneven.value).abs() <= 1e-12);
    }

    #[test]
    fn dimension_equation_left_side_decreases() {
        let g = |dim: f64| 0.4f64.powf(dim - 1.0) * 0.9 + 0.6f64.powf(dim - 1.0) * 0.7 - 1.0;
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let v = g(1.0 + i as f64 / 100.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn dimension_boundary_and_error_cases() {
        let flat = dimension_solve(0.5, 0.4, 0.6).unwrap();
        assert_eq!(flat.value, 1.0);
        assert!(flat.degenerate);
        assert!(matches!(
            dimension_solve(0.5, 0.3, 0.4),
            Err(Error::ConditionViolated(_))
        ));
        assert!(matches!(
            dimension_solve(1.5, 0.8, 0.8),
            Err(Error::ParamOutOfRange(_))
        ));
        assert!(matches!(
            dimension_solve(0.5, 0.8, 1.0),
            Err(Error::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn box_dimension_of_a_segment_is_one() {
        let cloud: Vec<(f64, f64)> = (0..100_000).map(|i| (i as f64 / 99_999.0, 0.25)).collect();
        let est = box_dimension(&cloud, 4..=10).unwrap();
        assert!(
            (0.97..=1.03).contains(&est.value),
            "segment estimate {}",
            est.value
        );
        assert!(est.residual > 0.999, "fit R² {}", est.residual);
    }

    #[test]
    fn box_dimension_of_a_smooth_graph_is_near_one() {
        let ifs = parabola();
        let cloud = attractor::chaos_game(&ifs, &ChaosGameParams::new(100_000, 7)).unwrap();
        let est = box_dimension(&cloud, 4..=10).unwrap();
        assert!(
            (0.95..=1.05).contains(&est.value),
            "parabola estimate {}",
            est.value
        );
    }

    #[test]
    fn box_dimension_input_guards() {
        let small: Vec<(f64, f64)> = (0..1000).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(
            box_dimension(&small, 4..=10),
            Err(Error::TooFewPoints { .. })
        ));
        let cloud: Vec<(f64, f64)> = (0..100_000).map(|i| (i as f64 / 99_999.0, 0.0)).collect();
        assert!(matches!(
            box_dimension(&cloud, 4..=6),
            Err(Error::TooFewScales { .. })
        ));
    }

    #[test]
    fn composed_ifs_squares_the_branches() {
        let ifs = parabola();
        let sq = compose_ifs(&ifs, 2).unwrap();
        assert_eq!(sq.n_branches(), 4);
        // First branch is the original first branch applied twice.
        assert_eq!(sq.l_map(1).a, 0.25);
        assert_eq!(sq.l_map(1).b, 0.0);
        match *sq.branch(1) {
            BranchMap::Affine { c, d, e } => {
                assert!(c.abs() < 1e-15);
                assert_eq!(d, 1.0 / 16.0);
                assert!(e.abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        // Refined nodes are graph points of the same function.
        assert_eq!(sq.nodes().len(), 5);
        for p in sq.nodes() {
            let y = attractor::evaluate(&ifs, p.x, 60).unwrap();
            assert!((y - p.y).abs() < 1e-12, "node ({}, {})", p.x, p.y);
        }
        sq.validate().unwrap();
    }

    #[test]
    fn composed_ifs_keeps_the_attractor() {
        let ifs = tent(0.3);
        let sq = compose_ifs(&ifs, 2).unwrap();
        let a = attractor::chaos_game(&ifs, &ChaosGameParams::new(40_000, 5)).unwrap();
        let b = attractor::chaos_game(&sq, &ChaosGameParams::new(40_000, 6)).unwrap();
        let d = attractor::hausdorff_distance(&a, &b).unwrap();
        assert!(d <= 2e-2, "attractor gap {d}");
    }

    #[test]
    fn composed_ifs_order_one_is_identity() {
        let ifs = tent(0.3);
        let same = compose_ifs(&ifs, 1).unwrap();
        assert_eq!(same.n_branches(), ifs.n_branches());
        for n in 1..=ifs.n_branches() {
            assert_eq!(same.l_map(n), ifs.l_map(n));
        }
        assert!(matches!(
            compose_ifs(&ifs, 4),
            Err(Error::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn uniqueness_probe_on_identical_systems_reports_zero() {
        let ifs = tent(0.3);
        let report = uniqueness_probe(&ifs, &ifs, 50, 2).unwrap();
        assert_eq!(report.attractor_gap, 0.0);
        assert_eq!(report.max_gap_theta1, 0.0);
        assert_eq!(report.max_gap_theta_n, 0.0);
        assert_eq!(report.ensemble_gap, 0.0);
    }

    #[test]
    fn uniqueness_probe_accepts_a_composed_system() {
        let ifs = tent(0.3);
        let sq = compose_ifs(&ifs, 2).unwrap();
        let report = uniqueness_probe(&ifs, &sq, 100, 3).unwrap();
        assert!(report.attractor_gap <= 2e-2);
        assert!(
            report.max_gap_theta1 <= 1e-6,
            "all-bottom continuation gap {}",
            report.max_gap_theta1
        );
        assert!(
            report.max_gap_theta_n <= 1e-6,
            "all-top continuation gap {}",
            report.max_gap_theta_n
        );
        assert!(report.ensemble_gap.is_finite());
    }

    #[test]
    fn uniqueness_probe_rejects_different_attractors() {
        assert!(matches!(
            uniqueness_probe(&tent(0.3), &tent(0.5), 50, 2),
            Err(Error::AttractorsDiffer(..))
        ));
    }
}
