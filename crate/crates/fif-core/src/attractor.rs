//! Attractor sampling and pointwise evaluation.
//!
//! Two complementary views of the same object: the chaos game draws random
//! points that all lie on the attractor, while [`evaluate`] computes the
//! underlying function at a chosen abscissa by descending through branch
//! preimages and unwinding the branch maps on the way back up.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs::{GeneralAffineIFS2D, InterpolationIFS};

/// Default preimage descent depth for [`evaluate`]. Every level multiplies
/// the initial chord error by the vertical contraction factor, so 40 levels
/// reach full double precision for factors up to about one half; steeper
/// systems need more.
pub const EVAL_DEPTH_DEFAULT: usize = 40;

/// Default number of warm-up iterations discarded before the chaos game
/// starts emitting points.
pub const BURN_IN_DEFAULT: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct ChaosGameParams {
    pub points: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for ChaosGameParams {
    fn default() -> Self {
        ChaosGameParams {
            points: 100_000,
            burn_in: BURN_IN_DEFAULT,
            seed: 0,
        }
    }
}

impl ChaosGameParams {
    pub fn new(points: usize, seed: u64) -> Self {
        ChaosGameParams {
            points,
            seed,
            ..Default::default()
        }
    }
}

/// Runs the chaos game: starting from the first data node (a fixed point of
/// the first branch, hence on the attractor), repeatedly applies a uniformly
/// random branch and records the orbit. With `burn_in = 0` the first emitted
/// point is the starting node itself; every point lies on the attractor up
/// to rounding.
///
/// The generator is xoshiro256** seeded from `params.seed` through
/// SplitMix64, and branch indices are drawn as `next_u64() % n`, so clouds
/// are bit-reproducible for a given seed across platforms.
pub fn chaos_game(ifs: &InterpolationIFS, params: &ChaosGameParams) -> Result<Vec<(f64, f64)>> {
    Ok(chaos_game_tagged(ifs, params)?
        .into_iter()
        .map(|(x, y, _)| (x, y))
        .collect())
}

/// [`chaos_game`] with each point carrying the index of the branch that
/// produced it, `0` for the starting node. Consumes the random stream
/// identically, so stripping the tags recovers the untagged cloud bit for
/// bit.
pub fn chaos_game_tagged(
    ifs: &InterpolationIFS,
    params: &ChaosGameParams,
) -> Result<Vec<(f64, f64, u32)>> {
    let n = ifs.n_branches() as u64;
    let mut rng = Xoshiro256StarStar::seed_from_u64(params.seed);
    let start = ifs.nodes()[0];
    let (mut x, mut y, mut tag) = (start.x, start.y, 0u32);
    let step = |x: &mut f64, y: &mut f64, tag: &mut u32, rng: &mut Xoshiro256StarStar| {
        let branch = (rng.next_u64() % n) as usize + 1;
        let (nx, ny) = ifs.apply_branch(branch, *x, *y)?;
        *x = nx;
        *y = ny;
        *tag = branch as u32;
        Ok::<(), Error>(())
    };
    for _ in 0..params.burn_in {
        step(&mut x, &mut y, &mut tag, &mut rng)?;
    }
    let mut out = Vec::with_capacity(params.points);
    for _ in 0..params.points {
        out.push((x, y, tag));
        step(&mut x, &mut y, &mut tag, &mut rng)?;
    }
    Ok(out)
}

/// Chaos game for general planar affine systems. The orbit starts at the
/// fixed point of the first map.
pub fn chaos_game_2d(
    ifs: &GeneralAffineIFS2D,
    params: &ChaosGameParams,
) -> Result<Vec<(f64, f64)>> {
    Ok(chaos_game_2d_tagged(ifs, params)?
        .into_iter()
        .map(|(x, y, _)| (x, y))
        .collect())
}

/// [`chaos_game_2d`] with per-point map tags, matching
/// [`chaos_game_tagged`].
pub fn chaos_game_2d_tagged(
    ifs: &GeneralAffineIFS2D,
    params: &ChaosGameParams,
) -> Result<Vec<(f64, f64, u32)>> {
    let m = ifs.map(1);
    // Solve (I - A) p = t for the fixed point.
    let (a, b) = (1.0 - m.a11, -m.a12);
    let (c, d) = (-m.a21, 1.0 - m.a22);
    let det = a * d - b * c;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularMap);
    }
    let (mut x, mut y) = ((d * m.tx - b * m.ty) / det, (a * m.ty - c * m.tx) / det);
    let mut tag = 0u32;

    let n = ifs.n_maps() as u64;
    let mut rng = Xoshiro256StarStar::seed_from_u64(params.seed);
    let step = |x: &mut f64, y: &mut f64, tag: &mut u32, rng: &mut Xoshiro256StarStar| {
        let map = (rng.next_u64() % n) as usize + 1;
        let (nx, ny) = ifs.map(map).apply(*x, *y);
        *x = nx;
        *y = ny;
        *tag = map as u32;
    };
    for _ in 0..params.burn_in {
        step(&mut x, &mut y, &mut tag, &mut rng);
    }
    let mut out = Vec::with_capacity(params.points);
    for _ in 0..params.points {
        out.push((x, y, tag));
        step(&mut x, &mut y, &mut tag, &mut rng);
    }
    Ok(out)
}

/// Piecewise-linear interpolant through the data nodes, the depth-zero
/// approximation refined by [`evaluate`].
fn chord_value(ifs: &InterpolationIFS, x: f64) -> f64 {
    let n = ifs.branch_containing(x);
    let nodes = ifs.nodes();
    let (p, q) = (nodes[n - 1], nodes[n]);
    p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x)
}

/// Evaluates the interpolation function at `x` by descending `depth` levels
/// of branch preimages and unwinding the branch maps back up. Each level
/// shrinks the error of the bottom chord approximation by the vertical
/// contraction factor, so the result converges geometrically in `depth`.
/// Data nodes come out exact at any depth.
pub fn evaluate(ifs: &InterpolationIFS, x: f64, depth: usize) -> Result<f64> {
    let dom = ifs.domain();
    if !dom.contains(x) {
        return Err(Error::OutOfDomain(x, dom.lo, dom.hi));
    }
    let mut path = Vec::with_capacity(depth);
    let mut t = x;
    for _ in 0..depth {
        let n = ifs.branch_containing(t);
        t = ifs.l_map(n).invert(t).clamp(dom.lo, dom.hi);
        path.push((n, t));
    }
    let mut y = chord_value(ifs, t);
    for &(n, tj) in path.iter().rev() {
        y = ifs.branch(n).value(tj, y)?;
    }
    Ok(y)
}

/// [`evaluate`] at many abscissas in parallel.
pub fn evaluate_many(ifs: &InterpolationIFS, xs: &[f64], depth: usize) -> Result<Vec<f64>> {
    xs.par_iter().map(|&x| evaluate(ifs, x, depth)).collect()
}

/// Evenly spaced graph samples `(x, f(x))` across the domain.
pub fn graph_points(ifs: &InterpolationIFS, count: usize, depth: usize) -> Result<Vec<(f64, f64)>> {
    let xs = ifs.domain().linspace(count.max(2));
    let ys = evaluate_many(ifs, &xs, depth)?;
    Ok(xs.into_iter().zip(ys).collect())
}

/// Cap on the refined grid of [`w_operator`], which multiplies the interval
/// count by the branch count on every application.
const POLYLINE_GRID_CAP: usize = 1 << 23;

/// Piecewise-linear approximant of the interpolation function on a finite
/// grid, carrying a certified bound on how far its grid values can sit from
/// the true function. [`w_operator`] turns one approximant into a finer one
/// and shrinks the certificate by the vertical contraction factor, so
/// iterating from [`PolylineApproximant::chord`] converges geometrically,
/// with a deterministic error guarantee the chaos game cannot offer.
#[derive(Debug, Clone)]
pub struct PolylineApproximant {
    xs: Vec<f64>,
    ys: Vec<f64>,
    sup_error_bound: f64,
}

impl PolylineApproximant {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, sup_error_bound: f64) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::GridMismatch(format!(
                "need at least two grid points with one value each, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::GridMismatch(
                "grid abscissas must be strictly increasing".into(),
            ));
        }
        if !sup_error_bound.is_finite() || sup_error_bound < 0.0 {
            return Err(Error::GridMismatch(format!(
                "error bound must be finite and non-negative, got {sup_error_bound}"
            )));
        }
        Ok(PolylineApproximant {
            xs,
            ys,
            sup_error_bound,
        })
    }

    /// The starting approximant: the chord polyline through the data nodes,
    /// certified by [`chord_error_bound`].
    pub fn chord(ifs: &InterpolationIFS) -> Result<Self> {
        PolylineApproximant::new(
            ifs.nodes().iter().map(|p| p.x).collect(),
            ifs.nodes().iter().map(|p| p.y).collect(),
            chord_error_bound(ifs)?,
        )
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Certified bound on the error at the stored grid points. When every
    /// branch map is affine the polyline is the exact operator image of the
    /// starting chord, so the bound holds between grid points too.
    pub fn sup_error_bound(&self) -> f64 {
        self.sup_error_bound
    }

    /// Value at `x` by linear interpolation, clamped to the grid ends.
    pub fn value(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&t| t <= x);
        if i == 0 {
            return self.ys[0];
        }
        if i == self.xs.len() {
            return *self.ys.last().unwrap();
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Grid samples as `(x, y)` pairs.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .copied()
            .zip(self.ys.iter().copied())
            .collect()
    }
}

/// One application of the graph refinement whose unique fixed point is the
/// interpolation function. The new grid is the union of the branch images
/// of the old one, and the value over the image of old point `t` under
/// branch `n` is `F_n(t, f0(t))`. Junction abscissas snap to the data
/// nodes, which the join conditions make exact, so every refinement still
/// interpolates the nodes; the error certificate contracts by the vertical
/// contraction factor.
pub fn w_operator(ifs: &InterpolationIFS, f0: &PolylineApproximant) -> Result<PolylineApproximant> {
    let nodes = ifs.nodes();
    let last = nodes.len() - 1;
    let xs0 = f0.xs();
    let ys0 = f0.ys();
    if xs0[0] != nodes[0].x || *xs0.last().unwrap() != nodes[last].x {
        return Err(Error::GridMismatch(format!(
            "approximant covers [{}, {}] but the system interpolates over [{}, {}]",
            xs0[0],
            xs0.last().unwrap(),
            nodes[0].x,
            nodes[last].x
        )));
    }
    if ys0[0] != nodes[0].y || *ys0.last().unwrap() != nodes[last].y {
        return Err(Error::GridMismatch(
            "approximant must take the endpoint node values at the endpoints".into(),
        ));
    }
    let new_len = (xs0.len() - 1) * ifs.n_branches() + 1;
    if new_len > POLYLINE_GRID_CAP {
        return Err(Error::ParamOutOfRange(format!(
            "refined grid would hold {new_len} points, cap is {POLYLINE_GRID_CAP}"
        )));
    }
    let mut xs = Vec::with_capacity(new_len);
    let mut ys = Vec::with_capacity(new_len);
    for n in 1..=ifs.n_branches() {
        // Both neighbouring branches send their shared endpoint to the node
        // between them, so each junction is written once, exactly.
        xs.push(nodes[n - 1].x);
        ys.push(nodes[n - 1].y);
        let l = ifs.l_map(n);
        let branch = ifs.branch(n);
        for i in 1..xs0.len() - 1 {
            let t = xs0[i];
            let xi = l.apply(t);
            // Rounding can push an image onto a neighbour; the grid must
            // stay strictly increasing, so fold such points away.
            if xi > *xs.last().unwrap() && xi < nodes[n].x {
                xs.push(xi);
                ys.push(branch.value(t, ys0[i])?);
            }
        }
    }
    xs.push(nodes[last].x);
    ys.push(nodes[last].y);
    let (_, s_bound) = ifs.derivative_bounds();
    PolylineApproximant::new(xs, ys, f0.sup_error_bound * s_bound)
}

pub fn bounding_box(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut bb = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in points {
        bb.0 = bb.0.min(x);
        bb.1 = bb.1.max(x);
        bb.2 = bb.2.min(y);
        bb.3 = bb.3.max(y);
    }
    Ok(bb)
}

/// Uniform bucket grid for nearest-neighbour queries over a fixed cloud.
struct PointGrid {
    cell: f64,
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    /// CSR layout: `starts[c]..starts[c + 1]` indexes `points` for cell c.
    starts: Vec<u32>,
    points: Vec<(f64, f64)>,
}

impl PointGrid {
    fn build(cloud: &[(f64, f64)]) -> Result<Self> {
        let (xmin, xmax, ymin, ymax) = bounding_box(cloud)?;
        let w = (xmax - xmin).max(0.0);
        let h = (ymax - ymin).max(0.0);
        let side = (cloud.len() as f64).sqrt().ceil().clamp(1.0, 2048.0);
        let cell = (w.max(h) / side).max(f64::MIN_POSITIVE);
        let nx = ((w / cell).ceil() as usize + 1).min(4096);
        let ny = ((h / cell).ceil() as usize + 1).min(4096);

        let index = |x: f64, y: f64| -> usize {
            let cx = (((x - xmin) / cell) as usize).min(nx - 1);
            let cy = (((y - ymin) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };

        let mut counts = vec![0u32; nx * ny + 1];
        for &(x, y) in cloud {
            counts[index(x, y) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut cursor = counts;
        let mut points = vec![(0.0, 0.0); cloud.len()];
        for &(x, y) in cloud {
            let c = index(x, y);
            points[cursor[c] as usize] = (x, y);
            cursor[c] += 1;
        }
        Ok(PointGrid {
            cell,
            x0: xmin,
            y0: ymin,
            nx,
            ny,
            starts,
            points,
        })
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let cx = ((x - self.x0) / self.cell).max(0.0) as usize;
        let cy = ((y - self.y0) / self.cell).max(0.0) as usize;
        (cx.min(self.nx - 1), cy.min(self.ny - 1))
    }

    /// Distance from `(x, y)` to the nearest cloud point, by expanding ring
    /// search. A cell at ring r holds no point closer than `(r - 1) * cell`,
    /// so the search stops as soon as the best distance rules out the next
    /// ring.
    fn nearest_dist(&self, x: f64, y: f64) -> f64 {
        let (cx, cy) = self.cell_of(x, y);
        let max_ring = (cx.max(self.nx - 1 - cx)).max(cy.max(self.ny - 1 - cy));
        let mut best = f64::INFINITY;
        for r in 0..=max_ring {
            if best.is_finite() && best <= (r as f64 - 1.0) * self.cell {
                break;
            }
            let xlo = cx.saturating_sub(r);
            let xhi = (cx + r).min(self.nx - 1);
            let ylo = cy.saturating_sub(r);
            let yhi = (cy + r).min(self.ny - 1);
            for gy in ylo..=yhi {
                let on_y_edge = gy == cy.wrapping_sub(r) || gy == cy + r;
                for gx in xlo..=xhi {
                    if !on_y_edge && gx != cx.wrapping_sub(r) && gx != cx + r {
                        continue;
                    }
                    let c = gy * self.nx + gx;
                    for i in self.starts[c]..self.starts[c + 1] {
                        let (px, py) = self.points[i as usize];
                        let d = ((px - x).powi(2) + (py - y).powi(2)).sqrt();
                        best = best.min(d);
                    }
                }
            }
        }
        best
    }
}

/// `sup_{p in from} dist(p, onto)`: how far `from` sticks out of `onto`.
pub fn one_sided_hausdorff(from: &[(f64, f64)], onto: &[(f64, f64)]) -> Result<f64> {
    if from.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let grid = PointGrid::build(onto)?;
    Ok(from
        .par_iter()
        .map(|&(x, y)| grid.nearest_dist(x, y))
        .reduce(|| 0.0, f64::max))
}

/// Symmetric Hausdorff distance between two finite point clouds.
pub fn hausdorff_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    Ok(one_sided_hausdorff(a, b)?.max(one_sided_hausdorff(b, a)?))
}

/// One application of the set map `S -> w_1(S) ∪ … ∪ w_N(S)` to a cloud.
/// The attractor is this map's unique fixed point.
pub fn hutchinson_step(ifs: &InterpolationIFS, cloud: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut image = Vec::with_capacity(cloud.len() * ifs.n_branches());
    for n in 1..=ifs.n_branches() {
        for &(x, y) in cloud {
            image.push(ifs.apply_branch(n, x, y)?);
        }
    }
    Ok(image)
}

/// Hausdorff distance between a sample cloud and its Hutchinson image.
/// Small values certify that the cloud is close to a set invariant under
/// the system, which is what being near the attractor means.
pub fn self_similarity_gap(ifs: &InterpolationIFS, cloud: &[(f64, f64)]) -> Result<f64> {
    hausdorff_distance(&hutchinson_step(ifs, cloud)?, cloud)
}

/// Upper bound on the gap between the interpolation function and the chord
/// interpolant, the depth-zero error of [`evaluate`]. Affine systems get a
/// closed-form geometric bound; others use twice the vertical extent of a
/// fixed-seed chaos sample.
pub fn chord_error_bound(ifs: &InterpolationIFS) -> Result<f64> {
    let node_max = ifs.nodes().iter().fold(0.0f64, |m, p| m.max(p.y.abs()));
    let all_affine = (1..=ifs.n_branches()).all(|n| ifs.branch(n).is_affine());
    if all_affine {
        let dom = ifs.domain();
        let x_max = dom.lo.abs().max(dom.hi.abs());
        let (m, s) = ifs.derivative_bounds();
        let e_max = (1..=ifs.n_branches()).fold(0.0f64, |acc, n| match ifs.branch(n) {
            crate::ifs::BranchMap::Affine { e, .. } => acc.max(e.abs()),
            _ => acc,
        });
        // |f| ≤ M |x| + e + s |f| pointwise via the fixed-point equation.
        let sup_f = (m * x_max + e_max) / (1.0 - s);
        Ok(sup_f + node_max)
    } else {
        let sample = chaos_game(ifs, &ChaosGameParams::new(4096, 0x5EED))?;
        let (_, _, ymin, ymax) = bounding_box(&sample)?;
        Ok(2.0 * (ymax - ymin) + node_max)
    }
}

/// Worst-case error of [`evaluate`] at the given depth: the chord bound
/// contracted once per descent level.
pub fn evaluate_error_bound(ifs: &InterpolationIFS, depth: usize) -> Result<f64> {
    let (_, s) = ifs.derivative_bounds();
    Ok(chord_error_bound(ifs)? * s.powi(depth as i32))
}

/// [`evaluate`] paired with the worst-case error certificate for the chosen
/// depth.
pub fn evaluate_with_bound(ifs: &InterpolationIFS, x: f64, depth: usize) -> Result<(f64, f64)> {
    Ok((evaluate(ifs, x, depth)?, evaluate_error_bound(ifs, depth)?))
}
