//! The 2-ray game: wall crossings restricted to the 3-fold, the endpoint model,
//! discrepancies and del Pezzo degrees.

use crate::chamber::{
    endpoint_classify, endpoint_normalize, ray_scan, toric_curve_intersection, ChamberFan, Endpoint, EndpointClass,
    EndpointData, Side,
};
use crate::corpus::{EndpointEquations, FamilyRecord, Presentation};
use crate::error::{invalid, Error, Result};
use crate::exactmath::{det2, int, ivec2, rat, Mat2, Rational, Vec2};
use crate::fano::FanoFamily;
use crate::format::{common_zero_check, CommonZero};
use crate::polyring::{Budget, Degree, Ideal, MonomialOrder, Polynomial, Ring};
use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    /// Toric data plus declared fixture outcomes.
    One,
    /// Groebner-certified wall restrictions where equations exist.
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Evidence {
    Symbolic,
    Declared,
    Toric,
    Unverified,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evidence::Symbolic => "symbolic",
            Evidence::Declared => "declared",
            Evidence::Toric => "toric",
            Evidence::Unverified => "unverified",
        })
    }
}

/// A weighted stratum P(weights) swept out by a wall crossing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub coordinates: Vec<String>,
    pub weights: Vec<i64>,
    /// Equations left after elimination; empty for a toric stratum.
    pub relations: Vec<Polynomial>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipData {
    pub contracted: Stratum,
    pub extracted: Stratum,
    /// -K . C on either side, when both strata are toric curves.
    pub k_contracted: Option<Rational>,
    pub k_extracted: Option<Rational>,
}

impl FlipData {
    /// (-w1, -w2, u1, u2): contracted weights negated, extracted weights as is.
    pub fn flip_type(&self) -> Vec<i64> {
        let mut c = self.contracted.weights.clone();
        c.sort_unstable_by(|a, b| b.cmp(a));
        let mut e = self.extracted.weights.clone();
        e.sort_unstable();
        c.iter().map(|w| -w).chain(e).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WallOutcome {
    Isomorphism,
    Flip(FlipData),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberPresentation {
    pub ambient: Vec<i64>,
    pub degrees: Vec<i64>,
    pub coordinates: Vec<String>,
    pub equations: Vec<Polynomial>,
    pub lambda: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyData {
    pub m: Vec2,
    pub n: Vec2,
    pub a: Rational,
    /// kappa(xi) / d5, an independent reading of the same number.
    pub toric: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    Isomorphism,
    Flip(FlipData),
    /// A wall crossing that was not restricted to the 3-fold.
    SmallModification,
    DivContraction {
        to: EndpointClass,
        d: i64,
        discrepancy: Option<Rational>,
        kappa: Vec<i64>,
        quotient: Option<i64>,
        curve: Option<[i64; 2]>,
    },
    Fibration {
        base: Vec<i64>,
        fiber: Option<FiberPresentation>,
        dp_degree: Option<Rational>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkStep {
    pub kind: StepKind,
    /// Grading columns on the wall ray, or on the last movable ray for the final step.
    pub wall: Vec<String>,
    pub ray: (i64, i64),
    pub evidence: Evidence,
    pub note: Option<String>,
}

impl LinkStep {
    pub fn label(&self) -> String {
        match &self.kind {
            StepKind::Isomorphism => "ISO".into(),
            StepKind::Flip(f) => {
                let t: Vec<String> = f.flip_type().iter().map(|w| w.to_string()).collect();
                format!("FLIP({})", t.join(","))
            }
            StepKind::SmallModification => "SMALL_MODIFICATION".into(),
            StepKind::DivContraction { to, .. } => format!("{to}"),
            StepKind::Fibration { .. } => "FIBRATION".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinkTrace {
    pub id: String,
    pub level: Level,
    pub fan: ChamberFan,
    pub steps: Vec<LinkStep>,
    pub endpoint: Endpoint,
    pub discrepancy: Option<DiscrepancyData>,
}

impl LinkTrace {
    pub fn labels(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.label()).collect()
    }

    pub fn terminal(&self) -> &LinkStep {
        self.steps.last().expect("traces end in a terminal step")
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self.steps.iter().map(step_json).collect();
        let endpoint = match &self.endpoint.data {
            EndpointData::Fibration { base, fiber } => json!({
                "class": self.endpoint.class.to_string(),
                "base": base.iter().map(|(n, w)| json!([n, w])).collect::<Vec<_>>(),
                "fiber_weights": fiber.iter().map(|(n, w)| json!([n, w])).collect::<Vec<_>>(),
            }),
            EndpointData::Contraction { z4, z5, z3, d, d4, d5, kappa, lambda, target, quotient, curve } => json!({
                "class": self.endpoint.class.to_string(),
                "z4": z4, "z5": z5, "z3": z3, "d": d, "d4": d4, "d5": d5,
                "kappa": kappa.iter().map(|(n, w)| json!([n, w])).collect::<Vec<_>>(),
                "lambda": lambda.iter().map(|(n, w)| json!([n, w])).collect::<Vec<_>>(),
                "target": target, "quotient": quotient, "curve": curve,
            }),
        };
        json!({
            "id": self.id,
            "level": match self.level { Level::One => 1, Level::Two => 2 },
            "steps": steps,
            "endpoint": endpoint,
            "discrepancy": self.discrepancy.as_ref().map(|d| json!({
                "m": [d.m[0].to_string(), d.m[1].to_string()],
                "n": [d.n[0].to_string(), d.n[1].to_string()],
                "a": d.a.to_string(),
                "toric": d.toric.to_string(),
            })),
        })
    }
}

fn stratum_json(s: &Stratum) -> Value {
    json!({
        "coordinates": s.coordinates,
        "weights": s.weights,
        "relations": s.relations.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    })
}

fn step_json(s: &LinkStep) -> Value {
    let kind = match &s.kind {
        StepKind::Flip(f) => json!({
            "type": f.flip_type(),
            "contracted": stratum_json(&f.contracted),
            "extracted": stratum_json(&f.extracted),
            "k_contracted": f.k_contracted.as_ref().map(|k| k.to_string()),
            "k_extracted": f.k_extracted.as_ref().map(|k| k.to_string()),
        }),
        StepKind::DivContraction { to, d, discrepancy, kappa, quotient, curve } => json!({
            "to": to.to_string(), "d": d, "discrepancy": discrepancy.as_ref().map(|a| a.to_string()),
            "kappa": kappa, "quotient": quotient, "curve": curve,
        }),
        StepKind::Fibration { base, fiber, dp_degree } => json!({
            "base": base,
            "fiber": fiber.as_ref().map(|f| json!({
                "ambient": f.ambient, "degrees": f.degrees, "coordinates": f.coordinates,
                "equations": f.equations.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "lambda": f.lambda.to_string(),
            })),
            "dp_degree": dp_degree.as_ref().map(|k| k.to_string()),
        }),
        _ => Value::Null,
    };
    json!({
        "step": s.label(),
        "wall": s.wall,
        "ray": [s.ray.0, s.ray.1],
        "evidence": s.evidence.to_string(),
        "note": s.note,
        "data": kind,
    })
}

impl fmt::Display for LinkTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}  Y -> X'", self.id)?;
        for s in &self.steps {
            let wall = s.wall.join(",");
            write!(f, "  [{wall}] ({},{})  {}  ({})", s.ray.0, s.ray.1, s.label(), s.evidence)?;
            match &s.kind {
                StepKind::Flip(d) => {
                    write!(f, "  contracts P({}) extracts P({})", join(&d.contracted.weights), join(&d.extracted.weights))?;
                    if let (Some(a), Some(b)) = (&d.k_contracted, &d.k_extracted) {
                        write!(f, "  -K.C = {a}, {b}")?;
                    }
                }
                StepKind::Fibration { base, fiber, dp_degree } => {
                    write!(f, "  base P({})", join(base))?;
                    if let Some(k) = dp_degree {
                        write!(f, "  dP{k}")?;
                    }
                    if let Some(p) = fiber {
                        write!(f, "  fiber X_{} in P({})", join(&p.degrees), join(&p.ambient))?;
                    }
                }
                StepKind::DivContraction { d, discrepancy, kappa, quotient, curve, .. } => {
                    write!(f, "  d = {d}  weights ({})", join(kappa))?;
                    if let Some(q) = quotient {
                        write!(f, "  target /mu_{q}")?;
                    }
                    if let Some(c) = curve {
                        write!(f, "  curve P({})", join(c))?;
                    }
                    if let Some(a) = discrepancy {
                        write!(f, "  discrepancy {a}")?;
                    }
                }
                _ => {}
            }
            if let Some(n) = &s.note {
                write!(f, "  [{n}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Del Pezzo degree of a weighted complete intersection surface by adjunction.
pub fn dp_degree(degrees: &[i64], ambient: &[i64]) -> Result<Rational> {
    if ambient.len() != degrees.len() + 3 {
        return invalid("not a surface: need |a| - |d| = 3");
    }
    if ambient.iter().chain(degrees).any(|&x| x <= 0) {
        return invalid("weights and degrees must be positive");
    }
    let sa: i64 = ambient.iter().sum();
    let sd: i64 = degrees.iter().sum();
    if sa <= sd {
        return invalid("not del Pezzo");
    }
    let pd: Rational = degrees.iter().map(|&d| int(d)).product();
    let pa: Rational = ambient.iter().map(|&a| int(a)).product();
    Ok(int((sa - sd) * (sa - sd)) * pd / pa)
}

/// a = m2 / (n2 m1 - n1 m2).
pub fn discrepancy(m: &Vec2, n: &Vec2) -> Result<Rational> {
    let den = &n[1] * &m[0] - &n[0] * &m[1];
    if den.is_zero() {
        return invalid("E' proportional to pullback");
    }
    Ok(&m[1] / den)
}

/// Reads (m, n) in the normalized contraction frame, with -K_Y the xi column and
/// E the t column.
pub fn endpoint_discrepancy(endpoint: &Endpoint) -> Result<DiscrepancyData> {
    let EndpointData::Contraction { z5, d5, .. } = &endpoint.data else {
        return invalid("not a contraction endpoint");
    };
    let g = &endpoint.normalized;
    let col = |n: &str| g.column(n).ok_or_else(|| Error::Invalid(format!("no column {n}")));
    let (xi, t, e) = (col("xi")?, col("t")?, col(z5)?);
    let basis = Mat2::from_columns(&ivec2(xi.0, xi.1), &ivec2(-t.0, -t.1));
    let inv = basis.inverse().ok_or(Error::RankDeficient)?;
    let m = inv.apply(&ivec2(0, 1));
    let n = inv.apply(&ivec2(e.0, e.1));
    let a = discrepancy(&m, &n)?;
    Ok(DiscrepancyData { m, n, a, toric: rat(xi.0, *d5) })
}

/// Cyclic quotient of a fake weighted projective space at a coordinate point:
/// the equations are solved for their linear parts at the point, and the local
/// coordinates left over carry weight 1 when mu_d moves them.
pub fn local_quotient(e: &EndpointEquations, d: i64) -> Result<(i64, Vec<(String, i64)>)> {
    if e.variables.len() != e.weights.len() {
        return invalid("variables and weights differ in length");
    }
    let ring = Ring::new(&e.variables);
    let p = ring.index_of(&e.point).ok_or_else(|| Error::Invalid(format!("unknown point {}", e.point)))?;
    let mut solved = vec![false; ring.nvars()];
    solved[p] = true;
    for s in &e.equations {
        let f = ring.parse(s)?.substitute_value(p, &int(1));
        let linear = (0..ring.nvars()).find(|&v| {
            !solved[v] && {
                let mut u = vec![0u32; ring.nvars()];
                u[v] = 1;
                !f.coefficient(&u).is_zero()
            }
        });
        if let Some(v) = linear {
            solved[v] = true;
        }
    }
    if !f_constants_vanish(&ring, &e.equations, p)? {
        return invalid("point does not lie on the variety");
    }
    let local: Vec<(String, i64)> = (0..ring.nvars())
        .filter(|&v| !solved[v])
        .map(|v| {
            let n = &ring.names()[v];
            (n.clone(), if e.mu.contains(n) { 1 } else { 0 })
        })
        .collect();
    Ok((d, local))
}

fn f_constants_vanish(ring: &Arc<Ring>, eqs: &[String], p: usize) -> Result<bool> {
    for s in eqs {
        let mut pt = vec![int(0); ring.nvars()];
        pt[p] = int(1);
        if !ring.parse(s)?.evaluate(&pt).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaReport {
    pub minors: Vec<Polynomial>,
    pub dimension: i64,
}

/// Parses a 2x3 matrix over the coordinates it uses, with their weights.
pub fn parse_gamma(family: &FanoFamily, m: &[Vec<String>]) -> Result<(Vec<Vec<Polynomial>>, Vec<i64>)> {
    let names: Vec<&str> = family.coordinates.iter().map(|c| c.name.as_str()).collect();
    let full = Ring::new(&names);
    let parsed = m.iter().map(|r| r.iter().map(|s| full.parse(s)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    let mut used: Vec<usize> = parsed.iter().flatten().flat_map(|p| p.variables()).collect();
    used.sort_unstable();
    used.dedup();
    let ring = Ring::new(&used.iter().map(|&i| names[i]).collect::<Vec<_>>());
    let map: Vec<Option<usize>> = (0..names.len()).map(|i| used.iter().position(|&u| u == i)).collect();
    let out = parsed
        .iter()
        .map(|r| r.iter().map(|p| p.map_ring(&ring, &map)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let weights = used.iter().map(|&i| family.coordinates[i].weight).collect();
    Ok((out, weights))
}

/// The three 2x2 minors of a 2x3 matrix and the dimension of the cone they cut out.
pub fn gamma_minors(m: &[Vec<Polynomial>], weights: &[i64], budget: &mut Budget) -> Result<GammaReport> {
    if m.len() != 2 || m.iter().any(|r| r.len() != 3) {
        return invalid("gamma matrix must be 2x3");
    }
    for (i, row) in m.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if !p.is_zero() && p.weighted_degree(weights)? == Degree::Nonhomogeneous {
                return invalid(format!("entry ({}, {}) is not homogeneous", i + 1, j + 1));
            }
        }
    }
    let minor = |a: usize, b: usize| &(&m[0][a] * &m[1][b]) - &(&m[0][b] * &m[1][a]);
    let minors = vec![minor(1, 2), minor(0, 2), minor(0, 1)];
    for (k, p) in minors.iter().enumerate() {
        if !p.is_zero() && p.weighted_degree(weights)? == Degree::Nonhomogeneous {
            return invalid(format!("minor {} is not homogeneous", k + 1));
        }
    }
    let ring = m[0][0].ring().clone();
    let ideal = Ideal::new(&ring, minors.clone()).with_default_order(MonomialOrder::Grevlex(weights.to_vec()));
    let dimension = ideal.dimension(budget)?;
    Ok(GammaReport { minors, dimension })
}

fn linear_candidates(g: &Polynomial) -> Vec<(usize, Rational)> {
    let n = g.ring().nvars();
    (0..n)
        .filter(|&v| g.degree_in(v) == 1)
        .filter_map(|v| {
            let mut u = vec![0u32; n];
            u[v] = 1;
            let c = g.coefficient(&u);
            let only = g.terms().filter(|(e, _)| e[v] > 0).count() == 1;
            (!c.is_zero() && only).then_some((v, c))
        })
        .collect()
}

fn in_radical(polys: &[Polynomial], v: usize, budget: &mut Budget) -> Result<bool> {
    let ring = polys.first().map(|p| p.ring().clone()).ok_or(Error::ZeroPolynomial)?;
    let mut names = ring.names().to_vec();
    names.push("z_rad".into());
    let big = Ring::new(&names);
    let map: Vec<Option<usize>> = (0..ring.nvars()).map(Some).collect();
    let mut gens = polys.iter().map(|p| p.map_ring(&big, &map)).collect::<Result<Vec<_>>>()?;
    let z = Polynomial::var(&big, ring.nvars());
    let x = Polynomial::var(&big, v);
    gens.push(&Polynomial::one(&big) - &(&z * &x));
    Ideal::new(&big, gens).is_unit(budget)
}

/// Outcome of cutting a locus down to its free coordinates.
enum Reduced {
    Empty,
    Locus { alive: Vec<usize>, relations: Vec<Polynomial> },
}

/// Repeatedly solves generators linear in a live variable (largest key first) and,
/// when `radical` is set, sets to zero any live variable vanishing on the locus.
/// Empty when the ideal is the unit ideal or every live variable vanishes.
fn reduce_locus(
    mut polys: Vec<Polynomial>,
    live: &[usize],
    key: &dyn Fn(usize) -> (i64, usize),
    radical: bool,
    budget: &mut Budget,
) -> Result<Reduced> {
    let mut alive: Vec<usize> = live.to_vec();
    loop {
        polys.retain(|p| !p.is_zero());
        if polys.iter().any(|p| p.as_constant().is_some()) {
            return Ok(Reduced::Empty);
        }
        let best = polys
            .iter()
            .enumerate()
            .flat_map(|(i, g)| linear_candidates(g).into_iter().map(move |(v, c)| (i, v, c)))
            .filter(|(_, v, _)| alive.contains(v))
            .max_by_key(|(_, v, _)| key(*v));
        if let Some((i, v, c)) = best {
            let ring = polys[i].ring().clone();
            let g = polys[i].clone();
            let lin = Polynomial::var(&ring, v).scale(&c);
            let value = (&g - &lin).scale(&(-c.recip()));
            polys = polys.iter().map(|p| p.substitute(v, &value)).collect();
            alive.retain(|&a| a != v);
            continue;
        }
        if !radical || polys.is_empty() {
            break;
        }
        let mut changed = false;
        for &v in &alive.clone() {
            if in_radical(&polys, v, budget)? {
                polys = polys.iter().map(|p| p.substitute_value(v, &int(0))).collect();
                alive.retain(|&a| a != v);
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }
    if alive.is_empty() {
        return Ok(Reduced::Empty);
    }
    Ok(Reduced::Locus { alive, relations: polys })
}

fn stratum(
    fan: &ChamberFan,
    w: (i64, i64),
    alive: &[usize],
    relations: Vec<Polynomial>,
    budget: &mut Budget,
) -> Result<Stratum> {
    let g = fan.grading();
    let coordinates: Vec<String> = alive.iter().map(|&c| g.labels()[c].clone()).collect();
    let weights: Vec<i64> = alive.iter().map(|&c| det2(w, g.col(c)).abs()).collect();
    let dim = if relations.is_empty() {
        alive.len() as i64
    } else {
        let sub = Ring::new(&coordinates);
        let ring = relations[0].ring().clone();
        let map: Vec<Option<usize>> = (0..ring.nvars()).map(|i| alive.iter().position(|&a| a == i)).collect();
        let rel = relations.iter().map(|p| p.map_ring(&sub, &map)).collect::<Result<Vec<_>>>()?;
        Ideal::new(&sub, rel).dimension(budget)?
    };
    if dim >= 3 {
        return invalid("not a small modification");
    }
    if dim < 2 {
        return invalid("wall locus is not a curve");
    }
    Ok(Stratum { coordinates, weights, relations })
}

fn side_locus(
    polys: &[Polynomial],
    fan: &ChamberFan,
    wall: usize,
    side: Side,
    budget: &mut Budget,
) -> Result<Option<Stratum>> {
    let ring = polys[0].ring().clone();
    let g = fan.grading();
    let idx = |c: usize| ring.index_of(&g.labels()[c]).ok_or_else(|| Error::Invalid("equation ring differs from grading".into()));
    let (live, dead) = match side {
        Side::Contracted => (fan.columns_before(wall), fan.columns_after(wall)),
        Side::Extracted => (fan.columns_after(wall), fan.columns_before(wall)),
    };
    let on_wall = &fan.rays()[wall].columns;
    if on_wall.len() != 1 {
        return invalid("wall restriction needs a single coordinate on the wall");
    }
    let mut base: Vec<Polynomial> = polys.to_vec();
    for &c in &dead {
        let v = idx(c)?;
        base = base.iter().map(|p| p.substitute_value(v, &int(0))).collect();
    }
    let b = idx(on_wall[0])?;
    base = base.iter().map(|p| p.substitute_value(b, &int(1))).collect();
    let live_vars: Vec<usize> = live.iter().map(|&c| idx(c)).collect::<Result<_>>()?;
    let w = fan.wall_vector(wall);
    let key = |v: usize| {
        let c = g.index_of(&ring.names()[v]).unwrap();
        (det2(w, g.col(c)).abs(), v)
    };
    match reduce_locus(base, &live_vars, &key, true, budget)? {
        Reduced::Empty => Ok(None),
        Reduced::Locus { alive, relations } => {
            let cols: Vec<usize> = alive.iter().map(|&v| g.index_of(&ring.names()[v]).unwrap()).collect();
            Ok(Some(stratum(fan, w, &cols, relations, budget)?))
        }
    }
}

fn flip_numbers(fan: &ChamberFan, wall: usize, c: &Stratum, e: &Stratum) -> Result<(Option<Rational>, Option<Rational>)> {
    let g = fan.grading();
    let Some(xi) = g.column("xi") else { return Ok((None, None)) };
    let w = fan.wall_vector(wall);
    let k = |s: &Stratum, side: Side| -> Result<Option<Rational>> {
        if s.coordinates.len() != 2 || !s.relations.is_empty() {
            return Ok(None);
        }
        let va = g.column(&s.coordinates[0]).unwrap();
        let vb = g.column(&s.coordinates[1]).unwrap();
        toric_curve_intersection(xi, w, va, vb, side).map(Some)
    };
    Ok((k(c, Side::Contracted)?, k(e, Side::Extracted)?))
}

/// Restricts the crossing of an interior wall to the 3-fold cut out by `polys`.
pub fn wall_restriction(polys: &[Polynomial], fan: &ChamberFan, wall: usize, budget: &mut Budget) -> Result<WallOutcome> {
    if !fan.walls().contains(&wall) {
        return invalid("not an interior wall");
    }
    if polys.is_empty() {
        return invalid("no equations");
    }
    let Some(c) = side_locus(polys, fan, wall, Side::Contracted, budget)? else {
        return Ok(WallOutcome::Isomorphism);
    };
    let Some(e) = side_locus(polys, fan, wall, Side::Extracted, budget)? else {
        return invalid("contracted locus with empty extracted locus");
    };
    let (kc, ke) = flip_numbers(fan, wall, &c, &e)?;
    Ok(WallOutcome::Flip(FlipData { contracted: c, extracted: e, k_contracted: kc, k_extracted: ke }))
}

/// Reads a flip from declared equations of its two loci.
pub fn declared_flip(
    ring: &Arc<Ring>,
    contracted: &[String],
    extracted: &[String],
    fan: &ChamberFan,
    wall: usize,
    budget: &mut Budget,
) -> Result<FlipData> {
    let g = fan.grading();
    let w = fan.wall_vector(wall);
    let mut read = |eqs: &[String], cols: Vec<usize>| -> Result<Stratum> {
        let polys = eqs.iter().map(|s| ring.parse(s)).collect::<Result<Vec<_>>>()?;
        let live: Vec<usize> = cols.iter().map(|&c| ring.index_of(&g.labels()[c]).unwrap()).collect();
        if let Some(p) = polys.iter().find(|p| p.variables().iter().any(|v| !live.contains(v))) {
            return invalid(format!("declared locus equation {p} leaves its side of the wall"));
        }
        let key = |v: usize| (det2(w, g.col(g.index_of(&ring.names()[v]).unwrap())).abs(), v);
        match reduce_locus(polys, &live, &key, false, budget)? {
            Reduced::Empty => invalid("declared locus is empty"),
            Reduced::Locus { alive, relations } => {
                let cols: Vec<usize> = alive.iter().map(|&v| g.index_of(&ring.names()[v]).unwrap()).collect();
                stratum(fan, w, &cols, relations, budget)
            }
        }
    };
    let c = read(contracted, fan.columns_before(wall))?;
    let e = read(extracted, fan.columns_after(wall))?;
    let (kc, ke) = flip_numbers(fan, wall, &c, &e)?;
    Ok(FlipData { contracted: c, extracted: e, k_contracted: kc, k_extracted: ke })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FirstWall {
    Pass,
    Fail(CommonZero),
}

/// The forms left in the wall coordinates (xi, x1) once everything past the first
/// wall vanishes must have no common zero.
pub fn first_wall_is_iso(family: &FanoFamily, fan: &ChamberFan) -> Result<FirstWall> {
    let eq = family.equations.as_ref().ok_or_else(|| Error::Invalid(format!("{}: no equations", family.id)))?;
    let wall = fan.walls().start;
    if !fan.walls().contains(&wall) {
        return invalid("no interior wall");
    }
    let g = fan.grading();
    let ring = &eq.ring;
    let on_wall: Vec<usize> = fan.rays()[wall].columns.iter().map(|&c| ring.index_of(&g.labels()[c]).unwrap()).collect();
    let (Some(xi), Some(x1)) = (ring.index_of("xi"), ring.index_of("x1")) else {
        return invalid("shape data missing: no xi, x1");
    };
    if !(on_wall.contains(&xi) && on_wall.contains(&x1)) {
        return invalid("first wall is not the (xi, x1) wall");
    }
    let mut polys = eq.polys.clone();
    for c in fan.columns_after(wall) {
        let v = ring.index_of(&g.labels()[c]).unwrap();
        polys = polys.iter().map(|p| p.substitute_value(v, &int(0))).collect();
    }
    let pure: Vec<Polynomial> =
        polys.into_iter().filter(|p| !p.is_zero() && p.variables().iter().all(|v| *v == xi || *v == x1)).collect();
    if pure.is_empty() {
        return invalid("shape data missing: no pure forms in xi, x1");
    }
    let w = |n: &str| family.weight_of(n).ok_or_else(|| Error::Invalid(format!("no weight for {n}")));
    match common_zero_check(&pure, xi, x1, (w("xi")?, w("x1")?))? {
        CommonZero::Empty => Ok(FirstWall::Pass),
        z => Ok(FirstWall::Fail(z)),
    }
}

const LAMBDAS: [i64; 6] = [2, 3, 5, 7, 11, 13];

/// Generic fiber of a fibration over P(a, b): the base coordinates are set to
/// (1, lambda) and linear coordinates are solved away.
pub fn generic_fiber(family: &FanoFamily, endpoint: &Endpoint, budget: &mut Budget) -> Result<FiberPresentation> {
    let eq = family.equations.as_ref().ok_or_else(|| Error::Invalid(format!("{}: no equations", family.id)))?;
    let EndpointData::Fibration { base, fiber } = &endpoint.data else {
        return invalid("not a fibration endpoint");
    };
    if base.len() != 2 {
        return invalid("generic fiber needs a base with two coordinates");
    }
    let ring = &eq.ring;
    let fw: BTreeMap<usize, i64> = fiber.iter().map(|(n, w)| (ring.index_of(n).unwrap(), *w)).collect();
    let (b0, b1) = (ring.index_of(&base[0].0).unwrap(), ring.index_of(&base[1].0).unwrap());
    let mut last = None;
    for lambda in LAMBDAS {
        let polys: Vec<Polynomial> =
            eq.polys.iter().map(|p| p.substitute_value(b0, &int(1)).substitute_value(b1, &int(lambda))).collect();
        let live: Vec<usize> = fw.keys().copied().collect();
        let key = |v: usize| (fw[&v], v);
        let Reduced::Locus { alive, relations } = reduce_locus(polys, &live, &key, false, budget)? else {
            last = Some(Error::Invalid("empty fiber".into()));
            continue;
        };
        let names: Vec<String> = alive.iter().map(|&v| ring.names()[v].clone()).collect();
        let weights: Vec<i64> = alive.iter().map(|v| fw[v]).collect();
        let sub = Ring::new(&names);
        let map: Vec<Option<usize>> = (0..ring.nvars()).map(|i| alive.iter().position(|&a| a == i)).collect();
        let rel = relations.iter().map(|p| p.map_ring(&sub, &map)).collect::<Result<Vec<_>>>()?;
        let order = MonomialOrder::Grevlex(weights.clone());
        let ideal = Ideal::new(&sub, rel.clone()).with_default_order(order.clone());
        let dim = ideal.dimension(budget)?;
        if dim != 3 {
            last = Some(Error::Invalid(format!("fiber cone has dimension {dim}")));
            continue;
        }
        let gens = minimal_generators(&sub, rel, &weights, budget)?;
        if dim != (names.len() - gens.len()) as i64 {
            return invalid("fiber presentation not recognized");
        }
        let mut degrees = Vec::new();
        for p in &gens {
            match p.weighted_degree(&weights)? {
                Degree::Homogeneous(d) => degrees.push(d),
                Degree::Nonhomogeneous => return invalid("fiber presentation not recognized"),
            }
        }
        let mut ambient = weights.clone();
        ambient.sort_unstable();
        degrees.sort_unstable();
        return Ok(FiberPresentation { ambient, degrees, coordinates: names, equations: gens, lambda: int(lambda) });
    }
    Err(last.unwrap_or_else(|| Error::Invalid("fiber presentation not recognized".into())))
}

/// Greedy minimal homogeneous generators, by increasing degree.
fn minimal_generators(
    ring: &Arc<Ring>,
    mut gens: Vec<Polynomial>,
    weights: &[i64],
    budget: &mut Budget,
) -> Result<Vec<Polynomial>> {
    gens.retain(|p| !p.is_zero());
    gens.sort_by_key(|p| p.max_degree(weights).unwrap_or(0));
    let order = MonomialOrder::Grevlex(weights.to_vec());
    let mut kept: Vec<Polynomial> = Vec::new();
    for g in gens {
        if !kept.is_empty() {
            let ideal = Ideal::new(ring, kept.clone()).with_default_order(order.clone());
            if ideal.contains(&g, budget)? {
                continue;
            }
        }
        kept.push(g.monic(&order));
    }
    Ok(kept)
}

/// Structural checks of a declared fiber presentation against the toric fiber weights.
pub fn check_declared_fiber(p: &Presentation, fiber_weights: &[i64], index: i64) -> Result<()> {
    let degrees = p.degrees.as_deref().unwrap_or(&[]);
    if !is_submultiset(&p.ambient, fiber_weights) {
        return invalid("fiber ambient is not among the fiber weights");
    }
    if p.ambient.len() != degrees.len() + 3 {
        return invalid("fiber presentation is not a surface");
    }
    let s = p.ambient.iter().sum::<i64>() - degrees.iter().sum::<i64>();
    if s != index {
        return invalid(format!("fiber index {s} differs from {index}"));
    }
    Ok(())
}

pub fn is_submultiset(small: &[i64], big: &[i64]) -> bool {
    let mut pool = big.to_vec();
    small.iter().all(|x| match pool.iter().position(|y| y == x) {
        Some(i) => {
            pool.swap_remove(i);
            true
        }
        None => false,
    })
}

fn step(kind: StepKind, fan: &ChamberFan, ray: usize, evidence: Evidence, note: Option<String>) -> LinkStep {
    LinkStep {
        kind,
        wall: fan.labels(ray).iter().map(|s| s.to_string()).collect(),
        ray: fan.rays()[ray].direction,
        evidence,
        note,
    }
}

fn budget_note(e: &Error) -> Option<String> {
    matches!(e, Error::BudgetExceeded(_)).then(|| e.to_string())
}

/// Plays the 2-ray game from the blowup to the endpoint.
pub fn trace_link(rec: &FamilyRecord, level: Level, budget_limit: u64) -> Result<LinkTrace> {
    let family = rec.family()?;
    let grading = family.grading.as_ref().ok_or_else(|| Error::Invalid(format!("{}: no grading", family.id)))?;
    let fan = ray_scan(grading)?;
    let symbolic = level == Level::Two && family.equations.is_some();
    let mut steps = Vec::new();
    let first = fan.walls().start;
    for wall in fan.walls() {
        let label = fan.labels(wall).join(",");
        let declared = rec.wall_loci.as_ref().and_then(|l| l.iter().find(|w| w.wall == label));
        let mut budget = Budget::new(budget_limit);
        if let Some(d) = declared {
            let ring = Ring::new(grading.labels());
            let f = declared_flip(&ring, &d.contracted, &d.extracted, &fan, wall, &mut budget)?;
            steps.push(step(StepKind::Flip(f), &fan, wall, Evidence::Declared, None));
            continue;
        }
        if !symbolic {
            let (kind, ev) = if wall == first {
                (StepKind::Isomorphism, Evidence::Declared)
            } else {
                (StepKind::SmallModification, Evidence::Unverified)
            };
            steps.push(step(kind, &fan, wall, ev, None));
            continue;
        }
        let outcome = if wall == first {
            first_wall_is_iso(&family, &fan).map(|r| match r {
                FirstWall::Pass => Ok(WallOutcome::Isomorphism),
                FirstWall::Fail(z) => Err(format!("first wall is not an isomorphism: {z:?}")),
            })
        } else {
            wall_restriction(&family.equations.as_ref().unwrap().polys, &fan, wall, &mut budget).map(Ok)
        };
        match outcome {
            Ok(Ok(WallOutcome::Isomorphism)) => steps.push(step(StepKind::Isomorphism, &fan, wall, Evidence::Symbolic, None)),
            Ok(Ok(WallOutcome::Flip(f))) => steps.push(step(StepKind::Flip(f), &fan, wall, Evidence::Symbolic, None)),
            Ok(Err(msg)) => return Err(Error::Invalid(msg)),
            Err(e) => match budget_note(&e) {
                Some(n) => steps.push(step(StepKind::SmallModification, &fan, wall, Evidence::Unverified, Some(n))),
                None => return Err(e),
            },
        }
    }
    let class = endpoint_classify(&fan);
    let endpoint = endpoint_normalize(&fan, class)?;
    let m2 = fan.mov().1;
    let mut disc = None;
    let last = match &endpoint.data {
        EndpointData::Fibration { base, fiber } => {
            let base_w: Vec<i64> = base.iter().map(|b| b.1).collect();
            let fiber_w: Vec<i64> = fiber.iter().map(|f| f.1).collect();
            let index = endpoint.normalized.column("xi").map(|c| c.1);
            let mut budget = Budget::new(budget_limit);
            let (pres, ev, note) = if symbolic && base.len() == 2 {
                match generic_fiber(&family, &endpoint, &mut budget) {
                    Ok(p) => (Some((p.degrees.clone(), p.ambient.clone(), Some(p))), Evidence::Symbolic, None),
                    Err(e) => match budget_note(&e) {
                        Some(n) => (None, Evidence::Unverified, Some(n)),
                        None => return Err(e),
                    },
                }
            } else if let (Some(p), Some(index)) = (&rec.fiber, index) {
                check_declared_fiber(p, &fiber_w, index)?;
                (Some((p.degrees.clone().unwrap_or_default(), p.ambient.clone(), None)), Evidence::Declared, None)
            } else {
                (None, Evidence::Toric, None)
            };
            let (fiber, dp) = match pres {
                Some((d, a, f)) => (f, Some(dp_degree(&d, &a)?)),
                None => (None, None),
            };
            step(StepKind::Fibration { base: base_w, fiber, dp_degree: dp }, &fan, m2, ev, note)
        }
        EndpointData::Contraction { d, kappa, quotient, curve, .. } => {
            let dd = endpoint_discrepancy(&endpoint)?;
            let kind = StepKind::DivContraction {
                to: class,
                d: *d,
                discrepancy: Some(dd.a.clone()),
                kappa: kappa.iter().map(|k| k.1).collect(),
                quotient: *quotient,
                curve: *curve,
            };
            disc = Some(dd);
            step(kind, &fan, m2, Evidence::Toric, None)
        }
    };
    steps.push(last);
    Ok(LinkTrace { id: family.id.clone(), level, fan, steps, endpoint, discrepancy: disc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    fn record(id: &str) -> FamilyRecord {
        Corpus::embedded().unwrap().record(id).unwrap().clone()
    }

    #[test]
    fn dp_degrees() {
        assert_eq!(dp_degree(&[4], &[1, 1, 1, 2]).unwrap(), int(2));
        assert_eq!(dp_degree(&[3], &[1, 1, 1, 1]).unwrap(), int(3));
        assert_eq!(dp_degree(&[6], &[1, 1, 2, 3]).unwrap(), int(1));
        assert_eq!(dp_degree(&[2, 2], &[1, 1, 1, 1, 1]).unwrap(), int(4));
        assert!(dp_degree(&[5], &[1, 1, 1, 2]).is_err());
        assert!(dp_degree(&[4], &[1, 1, 2]).is_err());
    }

    #[test]
    fn discrepancy_formula() {
        let r = 7;
        assert_eq!(discrepancy(&[int(1), rat(1, r)], &[int(0), int(1)]).unwrap(), rat(1, r));
        assert!(discrepancy(&[int(1), int(1)], &[int(2), int(2)]).is_err());
    }

    #[test]
    fn discrepancy_39660() {
        let t = trace_link(&record("#39660"), Level::One, 10_000).unwrap();
        let d = t.discrepancy.unwrap();
        assert_eq!(d.a, rat(1, 2));
        assert_eq!(d.toric, rat(1, 2));
    }

    #[test]
    fn local_quotient_39660() {
        let r = record("#39660");
        let (d, local) = local_quotient(r.endpoint_equations.as_ref().unwrap(), 2).unwrap();
        assert_eq!(d, 2);
        assert_eq!(local.iter().map(|l| l.1).collect::<Vec<_>>(), vec![1, 1, 1]);
    }

    #[test]
    fn flip_40672() {
        let t = trace_link(&record("#40672"), Level::Two, 100_000).unwrap();
        let flip = t.steps.iter().find_map(|s| match &s.kind {
            StepKind::Flip(f) => Some(f.clone()),
            _ => None,
        });
        let f = flip.unwrap();
        assert_eq!(f.flip_type(), vec![-3, -1, 1, 2]);
        assert_eq!(f.k_contracted, Some(rat(1, 3)));
        assert_eq!(f.k_extracted, Some(rat(-1, 2)));
        assert_eq!(t.steps[0].kind, StepKind::Isomorphism);
    }

    #[test]
    fn gamma_40672_and_40671() {
        for id in ["#40672", "#40671"] {
            let r = record(id);
            let (m, w) = parse_gamma(&r.family().unwrap(), r.gamma_matrix.as_ref().unwrap()).unwrap();
            assert_eq!(w, vec![1, 1, 1, 2]);
            let mut b = Budget::new(1_000_000);
            let g = gamma_minors(&m, &w, &mut b).unwrap();
            assert_eq!(g.minors.len(), 3);
            assert_eq!(g.dimension, 2, "{id}");
        }
    }

    #[test]
    fn laplace_identity() {
        let ring = Ring::new(&["a", "b", "c", "d", "e", "f"]);
        let v = |n: &str| ring.var(n).unwrap();
        let m = vec![vec![v("a"), v("b"), v("c")], vec![v("d"), v("e"), v("f")]];
        let mut b = Budget::new(100_000);
        let g = gamma_minors(&m, &[1; 6], &mut b).unwrap();
        for row in &m {
            let s = &(&(&row[0] * &g.minors[0]) - &(&row[1] * &g.minors[1])) + &(&row[2] * &g.minors[2]);
            assert!(s.is_zero());
        }
        assert_eq!(g.dimension, 4);
    }

    #[test]
    fn synthetic_first_wall_fails() {
        let mut r = record("#39961");
        // every pure form then vanishes along x1 = 0
        let eqs = r.equations.as_mut().unwrap();
        eqs[8] = eqs[8].replace("- xi^6", "- xi^4*x1");
        let f = r.family().unwrap();
        let fan = ray_scan(f.grading.as_ref().unwrap()).unwrap();
        assert!(matches!(first_wall_is_iso(&f, &fan).unwrap(), FirstWall::Fail(_)));
    }
}
