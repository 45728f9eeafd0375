//! The maps τ_a, f_a, f_{a,b}, g_a, the involution ι and the dual map g*_a.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Class, Symbol};
use crate::error::{Error, Result};
use crate::numerics::{q, Affine1, Block3, Interval, Point2, Point3, Rational, Rect2};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapParams {
    pub m: u32,
    pub a: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rational>,
}

impl MapParams {
    pub fn new(m: u32, a: Rational, b: Option<Rational>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParams(format!("m must be at least 2, got {m}")));
        }
        let inv = Rational::recip_of(m as u64);
        let in_range = |v: &Rational| v.is_positive() && *v < inv;
        if !in_range(&a) {
            return Err(Error::InvalidParams(format!("a = {a} is not in (0, 1/{m})")));
        }
        if let Some(b) = &b {
            if !in_range(b) {
                return Err(Error::InvalidParams(format!("b = {b} is not in (0, 1/{m})")));
            }
        }
        Ok(MapParams { m, a, b })
    }

    /// Parameters for the planar map f_a.
    pub fn planar(m: u32, a: Rational) -> Result<Self> {
        MapParams::new(m, a, None)
    }

    /// Parameters for g_a = f_{a, 1/m − a}.
    pub fn g(m: u32, a: Rational) -> Result<Self> {
        let b = Rational::recip_of(m as u64) - &a;
        MapParams::new(m, a, Some(b))
    }

    /// c₁ = 1/(m(m+1)).
    pub fn c1(m: u32) -> Rational {
        Rational::recip_of(m as u64 * (m as u64 + 1))
    }

    /// c₂ = 1/(m+1).
    pub fn c2(m: u32) -> Rational {
        Rational::recip_of(m as u64 + 1)
    }

    /// g_{c₁}, whose Lebesgue itineraries have law ν_β.
    pub fn mme_beta(m: u32) -> Result<Self> {
        MapParams::g(m, MapParams::c1(m))
    }

    /// g_{c₂}, whose Lebesgue itineraries have law ν_α.
    pub fn mme_alpha(m: u32) -> Result<Self> {
        MapParams::g(m, MapParams::c2(m))
    }

    pub fn one_over_m(&self) -> Rational {
        Rational::recip_of(self.m as u64)
    }

    /// m·a, the total x-width of the α-branches.
    pub fn ma(&self) -> Rational {
        &self.a * Rational::integer(self.m as i64)
    }

    pub fn b(&self) -> Result<&Rational> {
        self.b.as_ref().ok_or(Error::MissingB)
    }

    pub fn is_volume_preserving(&self) -> bool {
        match &self.b {
            Some(b) => &self.a + b == self.one_over_m(),
            None => false,
        }
    }

    /// Parameters of g_{1/m − a}, the map conjugated by ι in g*_a.
    pub fn dual(&self) -> Result<MapParams> {
        MapParams::g(self.m, self.one_over_m() - &self.a)
    }

    pub fn ln_m(&self) -> f64 {
        (self.m as f64).ln()
    }
}

/// One affine branch: its closed-convention domain and per-axis affine actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub symbol: Symbol,
    pub domain: Rect2,
    pub fx: Affine1,
    pub fy: Affine1,
    pub fz: Option<Affine1>,
}

impl Branch {
    pub fn apply(&self, p: &Point2) -> Point2 {
        Point2::new(self.fx.apply(&p.x), self.fy.apply(&p.y))
    }

    pub fn apply_rect(&self, r: &Rect2) -> Rect2 {
        Rect2::new(self.fx.image(&r.x), self.fy.image(&r.y))
    }

    pub fn pullback_rect(&self, r: &Rect2) -> Rect2 {
        Rect2::new(self.fx.inverse().image(&r.x), self.fy.inverse().image(&r.y))
    }

    pub fn image(&self) -> Rect2 {
        self.apply_rect(&self.domain)
    }

    pub fn domain3(&self) -> Block3 {
        Block3::new(self.domain.x.clone(), self.domain.y.clone(), Interval::unit())
    }

    pub fn z_map(&self) -> Result<&Affine1> {
        self.fz.as_ref().ok_or(Error::MissingB)
    }
}

/// A concrete map f_a (or f_{a,b} when b is set) with its branches precomputed.
#[derive(Clone, Debug)]
pub struct BakerMap {
    params: MapParams,
    branches: Vec<Branch>,
    /// a, 2a, …, ma.
    x_edges: Vec<Rational>,
    /// 1/m, …, (m−1)/m.
    y_edges: Vec<Rational>,
}

impl BakerMap {
    pub fn new(params: &MapParams) -> Self {
        Self::with_branches(params, standard_branches(params, BetaRule::Inverse))
    }

    /// The β-branch y-action read literally as y ↦ m·y − i + m + 1. It does not map
    /// the strips into the unit square; kept only to show the checks catch it.
    pub fn literal_beta_variant(params: &MapParams) -> Self {
        Self::with_branches(params, standard_branches(params, BetaRule::Literal))
    }

    fn with_branches(params: &MapParams, branches: Vec<Branch>) -> Self {
        let m = params.m as i64;
        BakerMap {
            params: params.clone(),
            branches,
            x_edges: (1..=m).map(|k| &params.a * Rational::integer(k)).collect(),
            y_edges: (1..m).map(|k| q(k, m)).collect(),
        }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn m(&self) -> u32 {
        self.params.m
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, s: Symbol) -> &Branch {
        let m = self.params.m as usize;
        let i = s.index as usize - 1;
        match s.kind {
            Class::Alpha => &self.branches[i],
            Class::Beta => &self.branches[m + i],
        }
    }

    pub fn tau(&self, x: &Rational) -> Result<Rational> {
        check_unit(x, "x")?;
        let s = self.label_x(x, &Rational::zero());
        Ok(self.branch(s).fx.apply(x))
    }

    fn label_x(&self, x: &Rational, y: &Rational) -> Symbol {
        let m = self.params.m as usize;
        if *x < self.x_edges[m - 1] {
            let i = self.x_edges.iter().take_while(|e| *e <= x).count();
            Symbol::alpha(i as u32 + 1)
        } else {
            let j = self.y_edges.iter().take_while(|e| *e <= y).count();
            Symbol::beta(j as u32 + 1)
        }
    }

    /// The γ with p ∈ Ω_γ^+ under the half-open conventions.
    pub fn label(&self, p: &Point2) -> Symbol {
        self.label_x(&p.x, &p.y)
    }

    /// True when p lies on an internal edge of the partition (outer edges of the square do not count).
    pub fn on_boundary(&self, p: &Point2) -> bool {
        let ma = &self.x_edges[self.x_edges.len() - 1];
        if p.x.is_positive() && p.x <= *ma && self.x_edges.contains(&p.x) {
            return true;
        }
        p.x >= *ma && self.y_edges.contains(&p.y)
    }

    pub fn apply2(&self, p: &Point2) -> Point2 {
        self.branch(self.label(p)).apply(p)
    }

    pub fn apply3(&self, p: &Point3) -> Result<Point3> {
        let b = self.branch(self.label(&p.xy()));
        let fz = b.z_map()?;
        Ok(Point3::new(b.fx.apply(&p.x), b.fy.apply(&p.y), fz.apply(&p.z)))
    }

    pub fn itinerary(&self, p: &Point2, n: usize) -> Result<Vec<Symbol>> {
        let mut w = Vec::with_capacity(n);
        let mut q = p.clone();
        for step in 0..n {
            if self.on_boundary(&q) {
                return Err(Error::BoundaryHit { step });
            }
            let s = self.label(&q);
            w.push(s);
            q = self.branch(s).apply(&q);
        }
        Ok(w)
    }

    /// Orbit p, f(p), …, fⁿ(p) with the labels of the first n points.
    pub fn orbit(&self, p: &Point2, n: usize) -> Result<(Vec<Point2>, Vec<Symbol>)> {
        let mut pts = Vec::with_capacity(n + 1);
        let mut syms = Vec::with_capacity(n);
        pts.push(p.clone());
        for step in 0..n {
            let q = &pts[step];
            if self.on_boundary(q) {
                return Err(Error::BoundaryHit { step });
            }
            let s = self.label(q);
            syms.push(s);
            let next = self.branch(s).apply(q);
            pts.push(next);
        }
        Ok((pts, syms))
    }

    pub fn central_jacobian(&self, p: &Point2) -> f64 {
        self.label(p).kind.jacobian_sign() as f64 * self.params.ln_m()
    }

    pub fn birkhoff_sum(&self, p: &Point2, n: usize) -> BirkhoffSum {
        let mut q = p.clone();
        let mut c = 0i64;
        for _ in 0..n {
            let s = self.label(&q);
            c += s.kind.jacobian_sign();
            q = self.branch(s).apply(&q);
        }
        BirkhoffSum {
            coefficient: c,
            m: self.params.m,
        }
    }

    pub fn cylinder_rect(&self, w: &[Symbol]) -> Option<Rect2> {
        let mut c = CylinderCursor::new(self);
        for &s in w {
            c = c.push(s)?;
        }
        Some(c.cylinder)
    }

    /// Branch-wise preimage pieces of a rectangle.
    pub fn pullback_pieces(&self, r: &Rect2) -> Vec<Rect2> {
        self.branches
            .iter()
            .filter_map(|b| {
                let piece = r.intersect(&b.image())?;
                b.pullback_rect(&piece).intersect(&b.domain)
            })
            .collect()
    }

    pub fn pullback_measure(&self, r: &Rect2) -> Rational {
        self.pullback_pieces(r).iter().map(Rect2::measure).sum()
    }

    pub fn pullback_measure3(&self, r: &Block3) -> Result<Rational> {
        let mut total = Rational::zero();
        for b in &self.branches {
            let fz = b.z_map()?;
            let dom = b.domain3();
            let img = Block3::new(b.fx.image(&dom.x), b.fy.image(&dom.y), fz.image(&dom.z));
            if let Some(piece) = r.intersect(&img) {
                let pre = Block3::new(
                    b.fx.inverse().image(&piece.x),
                    b.fy.inverse().image(&piece.y),
                    fz.inverse().image(&piece.z),
                );
                if let Some(pre) = pre.intersect(&dom) {
                    total += &pre.measure();
                }
            }
        }
        Ok(total)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BetaRule {
    Inverse,
    Literal,
}

fn standard_branches(p: &MapParams, rule: BetaRule) -> Vec<Branch> {
    let m = p.m as i64;
    let mr = Rational::integer(m);
    let inv_m = p.one_over_m();
    let ma = p.ma();
    let one = Rational::one();
    let mut out = Vec::with_capacity(2 * p.m as usize);
    for i in 1..=m {
        let ri = Rational::integer(i);
        let lo = &p.a * Rational::integer(i - 1);
        let hi = &p.a * &ri;
        let domain = Rect2::new(Interval::half_open(lo, hi), Interval::unit());
        let fx = Affine1::new(p.a.recip().unwrap(), Rational::integer(1 - i)).unwrap();
        let fy = Affine1::new(inv_m.clone(), &inv_m * Rational::integer(i - 1)).unwrap();
        let fz = p
            .b
            .as_ref()
            .map(|b| Affine1::new(&one - &mr * b, Rational::zero()).unwrap());
        out.push(Branch {
            symbol: Symbol::alpha(i as u32),
            domain,
            fx,
            fy,
            fz,
        });
    }
    let beta_width = &one - &ma;
    for i in 1..=m {
        let ylo = &inv_m * Rational::integer(i - 1);
        let yhi = &inv_m * Rational::integer(i);
        let y = if i == m {
            Interval::closed(ylo, yhi)
        } else {
            Interval::half_open(ylo, yhi)
        };
        let domain = Rect2::new(Interval::closed(ma.clone(), one.clone()), y);
        let fx = Affine1::new(
            beta_width.recip().unwrap(),
            -(&ma / &beta_width),
        )
        .unwrap();
        let y_offset = match rule {
            BetaRule::Inverse => Rational::integer(1 - i),
            BetaRule::Literal => Rational::integer(m + 1 - i),
        };
        let fy = Affine1::new(mr.clone(), y_offset).unwrap();
        let fz = p.b.as_ref().map(|b| {
            let off = &one + b * Rational::integer(i - m - 1);
            Affine1::new(b.clone(), off).unwrap()
        });
        out.push(Branch {
            symbol: Symbol::beta(i as u32),
            domain,
            fx,
            fy,
            fz,
        });
    }
    out
}

fn check_unit(v: &Rational, name: &str) -> Result<()> {
    if v.is_negative() || *v > Rational::one() {
        return Err(Error::OutOfDomain(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

fn check_point2(p: &Point2) -> Result<()> {
    check_unit(&p.x, "x")?;
    check_unit(&p.y, "y")
}

fn check_point3(p: &Point3) -> Result<()> {
    check_unit(&p.x, "x")?;
    check_unit(&p.y, "y")?;
    check_unit(&p.z, "z")
}

/// S_nφ^c as an exact multiple of log m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BirkhoffSum {
    pub coefficient: i64,
    pub m: u32,
}

impl BirkhoffSum {
    pub fn value(&self) -> f64 {
        self.coefficient as f64 * (self.m as f64).ln()
    }
}

/// Incremental cylinder construction: `cylinder` is the set of points following the
/// pushed word, `image` its image under the composed branches.
#[derive(Clone, Debug)]
pub struct CylinderCursor<'a> {
    map: &'a BakerMap,
    pub cylinder: Rect2,
    pub image: Rect2,
    to_image: (Affine1, Affine1),
}

impl<'a> CylinderCursor<'a> {
    pub fn new(map: &'a BakerMap) -> Self {
        CylinderCursor {
            map,
            cylinder: Rect2::unit(),
            image: Rect2::unit(),
            to_image: (Affine1::identity(), Affine1::identity()),
        }
    }

    pub fn push(&self, s: Symbol) -> Option<CylinderCursor<'a>> {
        let b = self.map.branch(s);
        let inter = self.image.intersect(&b.domain)?;
        let cylinder = Rect2::new(
            self.to_image.0.inverse().image(&inter.x),
            self.to_image.1.inverse().image(&inter.y),
        );
        Some(CylinderCursor {
            map: self.map,
            cylinder,
            image: b.apply_rect(&inter),
            to_image: (b.fx.after(&self.to_image.0), b.fy.after(&self.to_image.1)),
        })
    }
}

/// A half-open interval with endpoints on the grid of a random denominator ≤ 60.
pub fn random_interval<R: Rng>(rng: &mut R) -> Interval {
    let d = rng.gen_range(1..=60i64);
    let lo = rng.gen_range(0..d);
    let hi = rng.gen_range(lo + 1..=d);
    Interval::half_open(Rational::integer(lo) / Rational::integer(d), Rational::integer(hi) / Rational::integer(d))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationCheck {
    pub rects: usize,
    pub rect_failures: usize,
    pub blocks: usize,
    pub block_failures: usize,
}

impl PreservationCheck {
    pub fn passed(&self) -> bool {
        self.rect_failures == 0 && self.block_failures == 0
    }
}

/// Compares |map⁻¹(r)| with |r| on seeded random rectangles, and on blocks when the
/// map carries b.
pub fn check_measure_preservation(map: &BakerMap, rects: usize, blocks: usize, seed: u64) -> Result<PreservationCheck> {
    let mut rng = crate::stats::chunk_rng(seed, 0);
    let mut out = PreservationCheck::default();
    for _ in 0..rects {
        let r = Rect2::new(random_interval(&mut rng), random_interval(&mut rng));
        out.rects += 1;
        if map.pullback_measure(&r) != r.measure() {
            out.rect_failures += 1;
        }
    }
    if map.params().b.is_some() {
        for _ in 0..blocks {
            let b = Block3::new(
                random_interval(&mut rng),
                random_interval(&mut rng),
                random_interval(&mut rng),
            );
            out.blocks += 1;
            if map.pullback_measure3(&b)? != b.measure() {
                out.block_failures += 1;
            }
        }
    }
    Ok(out)
}

pub fn tau_apply(params: &MapParams, x: &Rational) -> Result<Rational> {
    BakerMap::new(params).tau(x)
}

pub fn partition_label(params: &MapParams, p: &Point2) -> Symbol {
    BakerMap::new(params).label(p)
}

pub fn f2_apply(params: &MapParams, p: &Point2) -> Result<Point2> {
    check_point2(p)?;
    Ok(BakerMap::new(params).apply2(p))
}

pub fn f3_apply(params: &MapParams, p: &Point3) -> Result<Point3> {
    check_point3(p)?;
    BakerMap::new(params).apply3(p)
}

/// ι(x, y, z) = (1 − z, 1 − y, 1 − x).
pub fn involution_apply(p: &Point3) -> Point3 {
    let one = Rational::one();
    Point3::new(&one - &p.z, &one - &p.y, &one - &p.x)
}

/// g*_a = ι⁻¹ ∘ g_{1/m−a} ∘ ι; only m and a are read from `params`.
pub fn dual_apply(params: &MapParams, p: &Point3) -> Result<Point3> {
    check_point3(p)?;
    let dual = BakerMap::new(&params.dual()?);
    Ok(involution_apply(&dual.apply3(&involution_apply(p))?))
}

pub fn central_jacobian(params: &MapParams, p: &Point2) -> f64 {
    BakerMap::new(params).central_jacobian(p)
}

pub fn birkhoff_sum(params: &MapParams, p: &Point2, n: usize) -> BirkhoffSum {
    BakerMap::new(params).birkhoff_sum(p, n)
}

pub fn itinerary(params: &MapParams, p: &Point2, n: usize) -> Result<Vec<Symbol>> {
    BakerMap::new(params).itinerary(p, n)
}

pub fn cylinder_rect(params: &MapParams, w: &[Symbol]) -> Option<Rect2> {
    BakerMap::new(params).cylinder_rect(w)
}
