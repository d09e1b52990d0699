//! Continuation of interpolation functions beyond their original domain.
//!
//! For an address θ (an infinite branch-index string), the order-k
//! continuation is the image of the attractor graph under
//! `w_{θ1}^{-1} ∘ … ∘ w_{θk}^{-1}`, applied innermost first. These images
//! nest as k grows, their union is the graph of a function extending the
//! original one, and distinct addresses generally produce genuinely
//! different extensions unless the underlying function is analytic.

use std::fmt;

use crate::attractor::{self, ChaosGameParams, EVAL_DEPTH_DEFAULT};
use crate::error::{Error, Result};
use crate::ifs::{AffineMap1D, BranchMap, DataNode, InterpolationIFS, Interval, TriAffine};

/// Words of length above this cap are refused by [`ensemble_words`].
const ENSEMBLE_CAP: u64 = 1_000_000;

/// An eventually periodic branch-index string: `head` followed by `period`
/// repeated forever. An empty period denotes a plain finite word, which is
/// enough for any operation that only consumes a prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Address {
    pub head: Vec<usize>,
    pub period: Vec<usize>,
}

impl Address {
    pub fn finite(head: Vec<usize>) -> Self {
        Address {
            head,
            period: Vec::new(),
        }
    }

    pub fn periodic(head: Vec<usize>, period: Vec<usize>) -> Self {
        Address { head, period }
    }

    /// Parses an address string. Symbols are 1-based branch indices written
    /// in base 10: juxtaposed digits when the system has at most 9 branches
    /// ("221"), comma- or whitespace-separated otherwise ("10,3"). A
    /// trailing parenthesized group is the period: "221(1)" is 2,2,1 then
    /// 1 forever.
    pub fn parse(text: &str, n_branches: usize) -> Result<Address> {
        let text = text.trim();
        let (head_text, period_text) = match text.find('(') {
            Some(open) => {
                let rest = &text[open + 1..];
                let close = rest
                    .find(')')
                    .ok_or_else(|| Error::AddressSyntax("unclosed '('".into()))?;
                if !rest[close + 1..].trim().is_empty() {
                    return Err(Error::AddressSyntax("content after the closing ')'".into()));
                }
                (&text[..open], &rest[..close])
            }
            None => {
                if text.contains(')') {
                    return Err(Error::AddressSyntax("')' without '('".into()));
                }
                (text, "")
            }
        };
        let head = parse_symbols(head_text, n_branches)?;
        let period = parse_symbols(period_text, n_branches)?;
        if text.contains('(') && period.is_empty() {
            return Err(Error::EmptyPeriodParens);
        }
        Ok(Address { head, period })
    }

    /// Symbol at 0-based position k, reading into the period when the head
    /// is exhausted.
    pub fn symbol(&self, k: usize) -> Result<usize> {
        if k < self.head.len() {
            return Ok(self.head[k]);
        }
        if self.period.is_empty() {
            return Err(Error::AddressNotPeriodic);
        }
        Ok(self.period[(k - self.head.len()) % self.period.len()])
    }

    /// First k symbols.
    pub fn prefix(&self, k: usize) -> Result<Vec<usize>> {
        (0..k).map(|i| self.symbol(i)).collect()
    }

    pub fn is_eventually_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// The same infinite string with `word` prepended.
    pub fn prepend(&self, word: &[usize]) -> Address {
        let mut head = word.to_vec();
        head.extend_from_slice(&self.head);
        Address {
            head,
            period: self.period.clone(),
        }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.head.iter().chain(&self.period).any(|&s| s > 9);
        let join = |symbols: &[usize]| -> String {
            let parts: Vec<String> = symbols.iter().map(|s| s.to_string()).collect();
            parts.join(if wide { "," } else { "" })
        };
        write!(f, "{}", join(&self.head))?;
        if !self.period.is_empty() {
            write!(f, "({})", join(&self.period))?;
        }
        Ok(())
    }
}

fn parse_symbols(text: &str, n_branches: usize) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let tokens: Vec<String> = if text.contains(',') || text.contains(char::is_whitespace) {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    } else if n_branches <= 9 {
        text.chars().map(|c| c.to_string()).collect()
    } else {
        vec![text.to_string()]
    };
    let mut out = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let sym: u64 = tok
            .parse()
            .map_err(|_| Error::AddressSyntax(format!("bad symbol {tok:?}")))?;
        if sym == 0 || sym > n_branches as u64 {
            return Err(Error::SymbolOutOfRange {
                symbol: sym,
                count: n_branches,
            });
        }
        out.push(sym as usize);
    }
    Ok(out)
}

/// Shape of the limiting continuation domain as the order grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainLimit {
    /// All symbols are 1: the domain grows to `[x_0, ∞)`.
    RightRay,
    /// All symbols are the top branch: the domain grows to `(-∞, x_N]`.
    LeftRay,
    /// Any mixed address: the domain grows to the whole line.
    FullLine,
}

/// The order-k continuation domain: all x whose forward image under
/// `L_{θk} ∘ … ∘ L_{θ1}` lands in the original interval. Computed exactly by
/// composing affine inverses, and nested increasingly in k.
pub fn domain_interval(ifs: &InterpolationIFS, theta: &Address, k: usize) -> Result<Interval> {
    let mut m = AffineMap1D::new(1.0, 0.0);
    for j in 0..k {
        let n = theta.symbol(j)?;
        check_symbol(ifs, n)?;
        m = ifs.l_map(n).compose(&m);
    }
    Ok(m.invert_interval(&ifs.domain()))
}

/// Classifies the limiting domain of an eventually periodic address.
pub fn domain_limit_kind(ifs: &InterpolationIFS, theta: &Address) -> Result<DomainLimit> {
    if !theta.is_eventually_periodic() {
        return Err(Error::AddressNotPeriodic);
    }
    for &s in theta.head.iter().chain(&theta.period) {
        check_symbol(ifs, s)?;
    }
    let all = |v: usize| theta.head.iter().chain(&theta.period).all(|&s| s == v);
    if all(1) {
        Ok(DomainLimit::RightRay)
    } else if all(ifs.n_branches()) {
        Ok(DomainLimit::LeftRay)
    } else {
        Ok(DomainLimit::FullLine)
    }
}

fn check_symbol(ifs: &InterpolationIFS, n: usize) -> Result<()> {
    if n == 0 || n > ifs.n_branches() {
        return Err(Error::SymbolOutOfRange {
            symbol: n as u64,
            count: ifs.n_branches(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub value: f64,
    /// Minimal order k at which the queried x is covered.
    pub depth_used: usize,
    /// Anchor evaluation bound amplified by the inverse-map stretch factors
    /// along the chain.
    pub error_bound: f64,
    pub domain_at_depth: Interval,
}

/// Evaluates the continuation along `theta` at `x`.
///
/// The minimal k with `x ∈ I_{θ|k}` is found by sweeping x forward through
/// the maps `L_{θ1}, L_{θ2}, …` until it lands in the original interval;
/// the function is evaluated there and the value is pulled back through the
/// inverse branch maps in reverse order, paired with the recorded partial
/// forward images. Using the minimal k makes the result independent of
/// `depth_cap`, and for x already inside the interval it reduces exactly to
/// [`attractor::evaluate`].
pub fn continue_eval(
    ifs: &InterpolationIFS,
    theta: &Address,
    x: f64,
    depth_cap: usize,
) -> Result<ContinuationResult> {
    let dom = ifs.domain();
    let mut z = vec![x];
    let mut k = None;
    for j in 0..=depth_cap {
        if dom.contains(z[j]) {
            k = Some(j);
            break;
        }
        if j == depth_cap {
            break;
        }
        let n = theta.symbol(j)?;
        check_symbol(ifs, n)?;
        z.push(ifs.l_map(n).apply(z[j]));
    }
    let k = k.ok_or(Error::OutOfDomainAtCap { x, cap: depth_cap })?;

    let mut y = attractor::evaluate(ifs, z[k], EVAL_DEPTH_DEFAULT)?;
    let mut amplification = 1.0;
    for j in (0..k).rev() {
        let n = theta.symbol(j)?;
        y = ifs.branch(n).invert_y(n, z[j + 1], z[j], y)?;
        let slope = ifs.branch(n).dy(z[j], y).abs();
        amplification *= if slope > 0.0 {
            1.0 / slope
        } else {
            f64::INFINITY
        };
    }

    Ok(ContinuationResult {
        value: y,
        depth_used: k,
        error_bound: attractor::evaluate_error_bound(ifs, EVAL_DEPTH_DEFAULT)? * amplification,
        domain_at_depth: domain_interval(ifs, theta, k)?,
    })
}

/// Chaos-game sampling of the order-k continuation: an attractor cloud
/// mapped through the inverse chain, innermost `w_{θk}^{-1}` first. Order
/// zero is the attractor cloud itself.
pub fn continuation_cloud(
    ifs: &InterpolationIFS,
    theta: &Address,
    k: usize,
    params: &ChaosGameParams,
) -> Result<Vec<(f64, f64)>> {
    let symbols = theta.prefix(k)?;
    for &s in &symbols {
        check_symbol(ifs, s)?;
    }
    let base = attractor::chaos_game(ifs, params)?;
    let mut cloud = Vec::with_capacity(base.len());
    for &(mut x, mut y) in &base {
        for j in (0..k).rev() {
            let (nx, ny) = ifs.invert_branch(symbols[j], x, y)?;
            x = nx;
            y = ny;
        }
        cloud.push((x, y));
    }
    Ok(cloud)
}

/// The IFS whose attractor is the order-k continuation graph, obtained by
/// conjugating every branch with the inverse chain. Affine branches only:
/// those are closed under composition, so the result is again an
/// interpolation IFS, with nodes the chain images of the original nodes.
pub fn conjugated_ifs(
    ifs: &InterpolationIFS,
    theta: &Address,
    k: usize,
) -> Result<InterpolationIFS> {
    for b in 1..=ifs.n_branches() {
        if !ifs.branch(b).is_affine() {
            return Err(Error::NonAffineUnsupported);
        }
    }

    // w_{θ|k} = w_{θk} ∘ … ∘ w_{θ1}, composed symbolically.
    let mut chain = TriAffine::identity();
    for j in 0..k {
        let n = theta.symbol(j)?;
        check_symbol(ifs, n)?;
        chain = TriAffine::of(ifs.l_map(n), ifs.branch(n)).compose(&chain);
    }
    let chain_inv = chain.inverse();

    let nodes: Vec<DataNode> = ifs
        .nodes()
        .iter()
        .map(|p| {
            let (x, y) = chain_inv.apply(p.x, p.y);
            DataNode::new(x, y)
        })
        .collect();
    let mut l_maps = Vec::with_capacity(ifs.n_branches());
    let mut branches = Vec::with_capacity(ifs.n_branches());
    for n in 1..=ifs.n_branches() {
        let w = TriAffine::of(ifs.l_map(n), ifs.branch(n));
        let conj = chain_inv.compose(&w).compose(&chain);
        l_maps.push(AffineMap1D::new(conj.a, conj.b));
        branches.push(BranchMap::Affine {
            c: conj.c,
            d: conj.d,
            e: conj.e,
        });
    }
    InterpolationIFS::new(nodes, l_maps, branches)
}

/// All branch words of length k, each one an order-k continuation prefix.
pub fn ensemble_words(n_branches: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let total = (n_branches as u128).pow(k as u32);
    if total > ENSEMBLE_CAP as u128 {
        return Err(Error::EnsembleTooLarge(total, ENSEMBLE_CAP));
    }
    let mut words = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(words.len() * n_branches);
        for w in &words {
            for s in 1..=n_branches {
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        words = next;
    }
    Ok(words)
}

/// Maximum difference over `samples` evenly spaced points of the two
/// continuations that share the prefix `sigma` and then follow `theta1`
/// and `theta2`. The shared prefix means the two agree on its domain up to
/// evaluation error; different prefixes generally do not agree.
pub fn agreement_check(
    ifs: &InterpolationIFS,
    sigma: &[usize],
    theta1: &Address,
    theta2: &Address,
    samples: usize,
) -> Result<f64> {
    let sigma_addr = Address::finite(sigma.to_vec());
    let dom = domain_interval(ifs, &sigma_addr, sigma.len())?;
    let cap = sigma.len() + 8;
    let mut worst = 0.0f64;
    for x in dom.linspace(samples.max(2)) {
        let a = continue_eval(ifs, &theta1.prepend(sigma), x, cap)?;
        let b = continue_eval(ifs, &theta2.prepend(sigma), x, cap)?;
        worst = worst.max((a.value - b.value).abs());
    }
    Ok(worst)
}

/// The paper-scale lower bound for the probability that a random address
/// continues a two-branch system the same way as `prefix` followed by the
/// all-ones tail: halving once per symbol, starting from one half.
pub fn continuation_probability_bound(n_branches: usize, prefix: &[usize]) -> Result<f64> {
    if n_branches != 2 {
        return Err(Error::UnsupportedBranchCount {
            expected: 2,
            actual: n_branches,
        });
    }
    for &s in prefix {
        if s == 0 || s > 2 {
            return Err(Error::SymbolOutOfRange {
                symbol: s as u64,
                count: 2,
            });
        }
    }
    Ok(0.5f64.powi(prefix.len() as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{ifs_from_analytic, ifs_from_data};
    use crate::scalar::ScalarFn;

    fn tent(p: f64) -> InterpolationIFS {
        ifs_from_data(
            &[
                DataNode::new(0.0, 0.0),
                DataNode::new(1.0, 1.0),
                DataNode::new(2.0, 0.0),
            ],
            &[p, p],
        )
        .unwrap()
    }

    fn parabola() -> InterpolationIFS {
        ifs_from_data(
            &[
                DataNode::new(0.0, 0.0),
                DataNode::new(0.5, 0.25),
                DataNode::new(1.0, 1.0),
            ],
            &[0.25, 0.25],
        )
        .unwrap()
    }

    #[test]
    fn address_parsing_round_trips() {
        let a = Address::parse("221(1)", 2).unwrap();
        assert_eq!(a.head, vec![2, 2, 1]);
        assert_eq!(a.period, vec![1]);
        assert_eq!(a.to_string(), "221(1)");

        let a = Address::parse("(2)", 2).unwrap();
        assert_eq!(a.head, Vec::<usize>::new());
        assert_eq!(a.period, vec![2]);
        assert_eq!(a.to_string(), "(2)");

        let a = Address::parse("10,3(1,2)", 12).unwrap();
        assert_eq!(a.head, vec![10, 3]);
        assert_eq!(a.period, vec![1, 2]);
        assert_eq!(a.to_string(), "10,3(1,2)");

        let b = Address::parse(&a.to_string(), 12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn address_parsing_rejects_malformed_text() {
        assert!(matches!(
            Address::parse("12()", 2),
            Err(Error::EmptyPeriodParens)
        ));
        assert!(matches!(
            Address::parse("13", 2),
            Err(Error::SymbolOutOfRange { symbol: 3, .. })
        ));
        assert!(matches!(
            Address::parse("0", 2),
            Err(Error::SymbolOutOfRange { symbol: 0, .. })
        ));
        assert!(matches!(
            Address::parse("1(2", 2),
            Err(Error::AddressSyntax(_))
        ));
        assert!(matches!(
            Address::parse("1x", 2),
            Err(Error::AddressSyntax(_))
        ));
    }

    #[test]
    fn address_symbols_extend_through_the_period() {
        let a = Address::parse("21(12)", 2).unwrap();
        let prefix = a.prefix(7).unwrap();
        assert_eq!(prefix, vec![2, 1, 1, 2, 1, 2, 1]);
        let finite = Address::finite(vec![1, 2]);
        assert!(matches!(finite.symbol(2), Err(Error::AddressNotPeriodic)));
    }

    #[test]
    fn domain_intervals_grow_in_closed_form() {
        let ifs = tent(0.3);
        let theta1 = Address::parse("(1)", 2).unwrap();
        let d = domain_interval(&ifs, &theta1, 3).unwrap();
        assert_eq!((d.lo, d.hi), (0.0, 16.0));

        let theta2 = Address::parse("(2)", 2).unwrap();
        let d = domain_interval(&ifs, &theta2, 1).unwrap();
        assert_eq!((d.lo, d.hi), (-2.0, 2.0));

        let d0 = domain_interval(&ifs, &theta2, 0).unwrap();
        assert_eq!((d0.lo, d0.hi), (0.0, 2.0));

        // Nesting in k.
        for k in 1..8 {
            let inner = domain_interval(&ifs, &theta2, k - 1).unwrap();
            let outer = domain_interval(&ifs, &theta2, k).unwrap();
            assert!(outer.lo <= inner.lo && inner.hi <= outer.hi);
        }
    }

    #[test]
    fn parabola_two_step_domain_matches_hand_computation() {
        let ifs = parabola();
        let theta = Address::parse("(2)", 2).unwrap();
        let d = domain_interval(&ifs, &theta, 2).unwrap();
        assert_eq!((d.lo, d.hi), (-3.0, 1.0));
    }

    #[test]
    fn domain_limit_classification() {
        let ifs = tent(0.3);
        let kind = |s: &str| domain_limit_kind(&ifs, &Address::parse(s, 2).unwrap()).unwrap();
        assert_eq!(kind("(1)"), DomainLimit::RightRay);
        assert_eq!(kind("11(1)"), DomainLimit::RightRay);
        assert_eq!(kind("(2)"), DomainLimit::LeftRay);
        assert_eq!(kind("21(1)"), DomainLimit::FullLine);
        assert!(matches!(
            domain_limit_kind(&ifs, &Address::finite(vec![1])),
            Err(Error::AddressNotPeriodic)
        ));
    }

    #[test]
    fn continuation_of_quarter_tent_is_the_parabola_extension() {
        // Scaling 1/4 makes the interpolant x(2 - x); its continuation along
        // any address is the analytic extension of that polynomial.
        let ifs = tent(0.25);
        let theta = Address::parse("(2)", 2).unwrap();
        let r = continue_eval(&ifs, &theta, -1.0, 8).unwrap();
        assert!((r.value - (-3.0)).abs() < 1e-9, "{}", r.value);
        assert_eq!(r.depth_used, 1);
        assert!(r.domain_at_depth.contains(-1.0));

        for i in 0..=40 {
            let x = -6.0 + 8.0 * i as f64 / 40.0;
            let r = continue_eval(&ifs, &theta, x, 12).unwrap();
            assert!(
                (r.value - x * (2.0 - x)).abs() < 1e-9,
                "x = {x}: {} vs {}",
                r.value,
                x * (2.0 - x)
            );
        }
    }

    #[test]
    fn continuation_restricts_to_the_original_function() {
        let ifs = tent(0.3);
        for s in ["(1)", "(2)", "21(12)"] {
            let theta = Address::parse(s, 2).unwrap();
            for i in 0..=20 {
                let x = 2.0 * i as f64 / 20.0;
                let r = continue_eval(&ifs, &theta, x, 10).unwrap();
                let direct = attractor::evaluate(&ifs, x, EVAL_DEPTH_DEFAULT).unwrap();
                assert_eq!(r.value, direct, "same arithmetic path at x = {x}");
                assert_eq!(r.depth_used, 0);
            }
        }
    }

    #[test]
    fn continuation_value_is_independent_of_depth_cap() {
        let ifs = tent(0.3);
        let theta = Address::parse("(2)", 2).unwrap();
        let r3 = continue_eval(&ifs, &theta, -1.7, 3).unwrap();
        let r9 = continue_eval(&ifs, &theta, -1.7, 9).unwrap();
        assert_eq!(r3.value, r9.value);
        assert_eq!(r3.depth_used, r9.depth_used);
    }

    #[test]
    fn continuation_reports_uncovered_points() {
        let ifs = tent(0.3);
        let theta = Address::parse("(1)", 2).unwrap();
        // The all-ones domain grows rightward only; x = -1 is never covered.
        assert!(matches!(
            continue_eval(&ifs, &theta, -1.0, 10),
            Err(Error::OutOfDomainAtCap { .. })
        ));
    }

    #[test]
    fn exponential_continues_to_the_left_exactly() {
        let ifs = ifs_from_analytic(&ScalarFn::Exp, Interval::new(1.0, 2.0).unwrap()).unwrap();
        let theta = Address::parse("(2)", 2).unwrap();
        let r = continue_eval(&ifs, &theta, 0.0, 8).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
        // Deeper leftward continuation still tracks e^x.
        for i in 0..=30 {
            let x = -2.0 + 4.0 * i as f64 / 30.0;
            let r = continue_eval(&ifs, &theta, x, 16).unwrap();
            assert!(
                (r.value - x.exp()).abs() < 1e-8,
                "x = {x}: {} vs {}",
                r.value,
                x.exp()
            );
        }
    }

    #[test]
    fn continuation_cloud_of_order_zero_is_the_attractor_cloud() {
        let ifs = tent(0.3);
        let params = ChaosGameParams::new(2_000, 9);
        let theta = Address::parse("(2)", 2).unwrap();
        assert_eq!(
            continuation_cloud(&ifs, &theta, 0, &params).unwrap(),
            attractor::chaos_game(&ifs, &params).unwrap()
        );
    }

    #[test]
    fn continuation_cloud_tracks_the_analytic_extension() {
        let ifs = tent(0.25);
        let theta = Address::parse("(2)", 2).unwrap();
        let cloud = continuation_cloud(&ifs, &theta, 4, &ChaosGameParams::new(20_000, 2)).unwrap();
        let mut lo = f64::INFINITY;
        for &(x, y) in &cloud {
            assert!((y - x * (2.0 - x)).abs() < 1e-9, "({x}, {y})");
            lo = lo.min(x);
        }
        // Four inverse steps of L_2 pull the left edge to -30.
        assert!(lo < -25.0);
    }

    #[test]
    fn conjugated_ifs_matches_hand_composed_coefficients() {
        // For the parabola system and one inverse step along branch 1, the
        // second conjugated branch is (x/2 + 1, x + y/4 + 1).
        let ifs = parabola();
        let theta = Address::parse("(1)", 2).unwrap();
        let conj = conjugated_ifs(&ifs, &theta, 1).unwrap();
        assert_eq!(conj.l_map(1), &AffineMap1D::new(0.5, 0.0));
        assert_eq!(conj.l_map(2), &AffineMap1D::new(0.5, 1.0));
        assert_eq!(
            conj.branch(1),
            &BranchMap::Affine {
                c: 0.0,
                d: 0.25,
                e: 0.0
            }
        );
        assert_eq!(
            conj.branch(2),
            &BranchMap::Affine {
                c: 1.0,
                d: 0.25,
                e: 1.0
            }
        );
        // Nodes are the inverse-chain images of the originals.
        let nodes = conj.nodes();
        assert_eq!(
            nodes.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(),
            vec![(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]
        );
    }

    #[test]
    fn conjugated_ifs_attractor_is_the_continuation() {
        let ifs = tent(0.25);
        let theta = Address::parse("(2)", 2).unwrap();
        let conj = conjugated_ifs(&ifs, &theta, 2).unwrap();
        conj.validate().unwrap();
        // Its attractor should also satisfy the x(2 - x) oracle, now over
        // the order-2 continuation domain [-6, 2].
        let cloud = attractor::chaos_game(&conj, &ChaosGameParams::new(5_000, 4)).unwrap();
        for &(x, y) in &cloud {
            assert!((y - x * (2.0 - x)).abs() < 1e-9, "({x}, {y})");
            assert!((-6.0..=2.0).contains(&x));
        }
    }

    #[test]
    fn conjugation_requires_affine_branches() {
        let ifs = ifs_from_analytic(&ScalarFn::Exp, Interval::new(1.0, 2.0).unwrap()).unwrap();
        let theta = Address::parse("(2)", 2).unwrap();
        assert!(matches!(
            conjugated_ifs(&ifs, &theta, 1),
            Err(Error::NonAffineUnsupported)
        ));
    }

    #[test]
    fn ensemble_enumerates_words_and_guards_size() {
        let words = ensemble_words(2, 4).unwrap();
        assert_eq!(words.len(), 16);
        assert_eq!(words[0], vec![1, 1, 1, 1]);
        assert_eq!(words[15], vec![2, 2, 2, 2]);
        let words = ensemble_words(4, 4).unwrap();
        assert_eq!(words.len(), 256);
        assert!(matches!(
            ensemble_words(3, 30),
            Err(Error::EnsembleTooLarge(..))
        ));
    }

    #[test]
    fn shared_prefixes_agree_and_probabilities_halve() {
        let ifs = tent(0.3);
        let t1 = Address::parse("(1)", 2).unwrap();
        let t2 = Address::parse("(2)", 2).unwrap();
        // Same prefix: agreement on its domain regardless of the tails.
        let diff = agreement_check(&ifs, &[2, 2], &t1, &t2, 50).unwrap();
        assert!(diff < 1e-9, "diff = {diff}");

        assert_eq!(continuation_probability_bound(2, &[]).unwrap(), 0.5);
        assert_eq!(continuation_probability_bound(2, &[2]).unwrap(), 0.25);
        assert_eq!(continuation_probability_bound(2, &[2, 2]).unwrap(), 0.125);
        assert!(matches!(
            continuation_probability_bound(3, &[]),
            Err(Error::UnsupportedBranchCount { .. })
        ));
    }

    #[test]
    fn different_prefixes_can_disagree() {
        let ifs = tent(0.3);
        let t1 = Address::finite(vec![2, 1, 2]);
        let t2 = Address::finite(vec![2, 2, 1]);
        let d1 = domain_interval(&ifs, &t1, 3).unwrap();
        let d2 = domain_interval(&ifs, &t2, 3).unwrap();
        let overlap = d1.intersect(&d2).unwrap();
        let mut worst = 0.0f64;
        for x in overlap.linspace(200) {
            let a = continue_eval(&ifs, &t1, x, 3).unwrap().value;
            let b = continue_eval(&ifs, &t2, x, 3).unwrap().value;
            worst = worst.max((a - b).abs());
        }
        assert!(worst > 0.1, "continuations coincide unexpectedly: {worst}");
    }
}
