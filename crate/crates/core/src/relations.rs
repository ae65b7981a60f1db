//! Identities among multizeta values: the sum shuffle and its product form,
//! a catalog of special identities, and a search for `F_p`-linear relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::carlitz::omega_at_t;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::mzv::{enumerate_preorders, jumps_to_preorder, Composition, JumpSet, LinearPreorder, MultiZeta};
use crate::poly::RatFunc;
use crate::reconstruct::rational_reconstruct_auto;
use crate::series::TildeSeries;

/// Catalog identifiers accepted by [`verify_catalog`].
pub const CATALOG_IDS: &[&str] = &[
    "p-power",
    "even-rational",
    "low-s-shuffle",
    "degenerate-collapse",
    "salvage",
    "naive-sum-shuffle",
    "naive-integral-shuffle",
    "z-collapse",
    "digit-cube",
    "digit-quartic",
];

/// Default largest degree for `S_d`-level checks.
pub const DEFAULT_D_MAX: u32 = 2;

/// Default cap on the number of monomials in a relation search.
pub const DEFAULT_BASIS_CAP: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    /// The residual must vanish to precision.
    Zero,
    /// The value must be visibly nonzero at precision.
    NonZero,
    /// The value must be recognized as an element of `F_q(t)`.
    Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub passed: bool,
    /// First scaled exponent with a nonzero coefficient, when there is one.
    pub first_nonzero: Option<i64>,
    pub lattice: u32,
    pub detail: Option<String>,
}

impl Check {
    fn zero(label: impl Into<String>, x: &TildeSeries) -> Check {
        let v = x.valuation();
        Check {
            label: label.into(),
            kind: CheckKind::Zero,
            passed: v.is_none(),
            first_nonzero: v,
            lattice: x.w(),
            detail: None,
        }
    }

    fn nonzero(label: impl Into<String>, x: &TildeSeries) -> Check {
        let v = x.valuation();
        Check {
            label: label.into(),
            kind: CheckKind::NonZero,
            passed: v.is_some(),
            first_nonzero: v,
            lattice: x.w(),
            detail: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Holds,
    Fails,
    /// Nothing contradicts the identity, but a required nonzero value or
    /// reconstruction was not visible at this precision.
    Inconclusive,
}

impl Outcome {
    /// Process exit code for this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
            Outcome::Inconclusive => 3,
        }
    }
}

/// One evaluated identity with its sub-checks.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityInstance {
    pub id: String,
    pub q: u32,
    pub params: BTreeMap<String, String>,
    pub precision: i64,
    pub checks: Vec<Check>,
}

impl IdentityInstance {
    fn new(id: &str, field: &Field, n: i64) -> Self {
        IdentityInstance {
            id: id.to_string(),
            q: field.q(),
            params: BTreeMap::new(),
            precision: n,
            checks: Vec::new(),
        }
    }

    fn param(mut self, k: &str, v: impl fmt::Display) -> Self {
        self.params.insert(k.to_string(), v.to_string());
        self
    }

    pub fn outcome(&self) -> Outcome {
        let failed = |k: CheckKind| self.checks.iter().any(|c| c.kind == k && !c.passed);
        if failed(CheckKind::Zero) {
            Outcome::Fails
        } else if failed(CheckKind::NonZero) || failed(CheckKind::Rational) {
            Outcome::Inconclusive
        } else {
            Outcome::Holds
        }
    }

    pub fn holds(&self) -> bool {
        self.outcome() == Outcome::Holds
    }

    /// The first failing zero-check and the exponent of its leading nonzero term.
    pub fn certificate(&self) -> Option<(&str, i64, u32)> {
        self.checks
            .iter()
            .find(|c| c.kind == CheckKind::Zero && !c.passed)
            .map(|c| (c.label.as_str(), c.first_nonzero.unwrap(), c.lattice))
    }

    pub fn summary(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let status = match self.outcome() {
            Outcome::Holds => "holds".to_string(),
            Outcome::Fails => {
                let (label, e, w) = self.certificate().unwrap();
                if w == 0 {
                    format!("fails: {label} has a nonzero u^{e} term")
                } else {
                    format!("fails: {label} has a nonzero u^({e}/q^{w}) term")
                }
            }
            Outcome::Inconclusive => "inconclusive at this precision".to_string(),
        };
        format!("{} q={} [{}] N={}: {}", self.id, self.q, params.join(" "), self.precision, status)
    }
}

/// A degenerate multizeta value `ζ_I(s)` used as a factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    /// Runs of equal degree, largest degree first; each run sorted.
    pub runs: Vec<Vec<u64>>,
}

impl Atom {
    pub fn zeta(s: &[u64]) -> Atom {
        Atom {
            runs: s.iter().map(|&x| vec![x]).collect(),
        }
    }

    /// Totally degenerate `z(s)`.
    pub fn z(s: &[u64]) -> Atom {
        let mut run = s.to_vec();
        run.sort_unstable();
        Atom { runs: vec![run] }
    }

    pub fn from_jumps(s: &Composition, jumps: &JumpSet) -> Atom {
        let mut runs: Vec<Vec<u64>> = vec![vec![s.s[0]]];
        for i in 1..s.depth() {
            if jumps.set.contains(&i) {
                runs.push(vec![s.s[i]]);
            } else {
                runs.last_mut().unwrap().push(s.s[i]);
            }
        }
        for r in runs.iter_mut() {
            r.sort_unstable();
        }
        Atom { runs }
    }

    pub fn composition(&self) -> Composition {
        Composition {
            s: self.runs.iter().flatten().copied().collect(),
        }
    }

    pub fn jumps(&self) -> JumpSet {
        let r: usize = self.runs.iter().map(|b| b.len()).sum();
        let mut set = BTreeSet::new();
        let mut pos = 0;
        for b in &self.runs[..self.runs.len() - 1] {
            pos += b.len();
            set.insert(pos);
        }
        JumpSet { r, set }
    }

    pub fn weight(&self) -> u64 {
        self.runs.iter().flatten().sum()
    }

    pub fn depth(&self) -> usize {
        self.runs.iter().map(|b| b.len()).sum()
    }

    pub fn value(&self, mz: &mut MultiZeta, n: i64) -> Result<TildeSeries> {
        mz.zeta_i(&self.composition(), &self.jumps(), n)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        if self.runs.iter().all(|b| b.len() == 1) {
            write!(f, "ζ({})", list(&self.composition().s))
        } else if self.runs.len() == 1 {
            write!(f, "z({})", list(&self.runs[0]))
        } else {
            let parts: Vec<String> = self.runs.iter().map(|b| list(b)).collect();
            write!(f, "ζ({})", parts.join(" | "))
        }
    }
}

/// A product of atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<Atom>);

impl Monomial {
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|a| a.weight()).sum()
    }

    pub fn value(&self, mz: &mut MultiZeta, n: i64) -> Result<TildeSeries> {
        let mut acc = TildeSeries::one(mz.field()).truncate(n);
        for a in &self.0 {
            acc = acc.mul(&a.value(mz, n)?);
        }
        Ok(acc)
    }

    /// JSON descriptor: one `{"s": [...], "jumps": [...]}` per factor.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.0
                .iter()
                .map(|a| {
                    serde_json::json!({
                        "s": a.composition().s,
                        "jumps": a.jumps().set.iter().copied().collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(String, usize)> = Vec::new();
        for a in &self.0 {
            let s = a.to_string();
            match parts.last_mut() {
                Some((last, k)) if *last == s => *k += 1,
                _ => parts.push((s, 1)),
            }
        }
        let body: Vec<String> = parts
            .into_iter()
            .map(|(s, k)| if k == 1 { s } else { format!("{s}^{k}") })
            .collect();
        write!(f, "{}", body.join("·"))
    }
}

/// `Σ_k c_k·m_k` with integer coefficients reduced into `F_p`.
pub fn combination(
    mz: &mut MultiZeta,
    terms: &[(i64, Monomial)],
    n: i64,
) -> Result<TildeSeries> {
    let f = mz.field().clone();
    let mut acc = TildeSeries::zero(&f, 0, n);
    for (c, m) in terms {
        let c = f.from_int(*c);
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&m.value(mz, n)?.scale_by(c));
    }
    Ok(acc.truncate(n))
}

fn single(a: Atom) -> Monomial {
    Monomial(vec![a])
}

fn describe(terms: &[(i64, Monomial)]) -> String {
    let mut out = String::new();
    for (k, (c, m)) in terms.iter().enumerate() {
        let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
        if k == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if mag != 1 {
            out.push_str(&format!("{mag}·"));
        }
        out.push_str(&m.to_string());
    }
    out
}

/// Checks that `Σ c_k m_k` vanishes to precision `n`.
pub fn verify_combination(
    field: &Field,
    id: &str,
    terms: &[(i64, Monomial)],
    n: i64,
) -> Result<IdentityInstance> {
    let mut mz = MultiZeta::new(field);
    let x = combination(&mut mz, terms, n)?;
    let mut inst = IdentityInstance::new(id, field, n).param("combination", describe(terms));
    inst.checks.push(Check::zero(format!("{} = 0", describe(terms)), &x));
    Ok(inst)
}

/// `Π_i ζ(s_i) = Σ_ρ ζ_ρ(s)` over all linear preorders.
pub fn verify_sum_shuffle(field: &Field, s: &Composition, n: i64) -> Result<IdentityInstance> {
    let r = s.depth();
    if r > 5 {
        return Err(Error::InvalidArgument("sum shuffle supports depth ≤ 5".into()));
    }
    let mut mz = MultiZeta::new(field);
    let mut lhs = TildeSeries::one(field).truncate(n);
    for &x in &s.s {
        lhs = lhs.mul(&mz.zeta(&Composition::new(vec![x])?, n)?);
    }
    let mut rhs = TildeSeries::zero(field, 0, n);
    let all = enumerate_preorders(r)?;
    for rho in &all {
        rhs = rhs.add(&mz.zeta_rho(s, rho, n)?);
    }
    let mut inst = IdentityInstance::new("sum-shuffle", field, n)
        .param("s", s)
        .param("preorders", all.len());
    inst.checks.push(Check::zero("Π ζ(s_i) − Σ_ρ ζ_ρ(s)", &lhs.sub(&rhs)));
    Ok(inst)
}

/// Preorders on `1..=r0+r1` restricting to `ρ0` on the first `r0` indices and to `ρ1` on the rest.
pub fn compatible_preorders(rho0: &LinearPreorder, rho1: &LinearPreorder) -> Result<Vec<LinearPreorder>> {
    let (r0, r1) = (rho0.depth(), rho1.depth());
    Ok(enumerate_preorders(r0 + r1)?
        .into_iter()
        .filter(|rho| rho.restrict(1, r0) == *rho0 && rho.restrict(r0 + 1, r0 + r1) == *rho1)
        .collect())
}

/// `ζ_{ρ0}(s0)·ζ_{ρ1}(s1) = Σ_ρ ζ_ρ(s0 s1)` over compatible `ρ`.
pub fn verify_shuffle_product(
    field: &Field,
    s0: &Composition,
    rho0: &LinearPreorder,
    s1: &Composition,
    rho1: &LinearPreorder,
    n: i64,
) -> Result<IdentityInstance> {
    if s0.depth() + s1.depth() > 5 {
        return Err(Error::InvalidArgument("product shuffle supports r0 + r1 ≤ 5".into()));
    }
    let mut mz = MultiZeta::new(field);
    let lhs = mz.zeta_rho(s0, rho0, n)?.mul(&mz.zeta_rho(s1, rho1, n)?);
    let s = Composition::new(s0.s.iter().chain(&s1.s).copied().collect())?;
    let rhos = compatible_preorders(rho0, rho1)?;
    let mut rhs = TildeSeries::zero(field, 0, n);
    for rho in &rhos {
        rhs = rhs.add(&mz.zeta_rho(&s, rho, n)?);
    }
    let mut inst = IdentityInstance::new("shuffle-product", field, n)
        .param("s0", s0)
        .param("rho0", rho0)
        .param("s1", s1)
        .param("rho1", rho1)
        .param("terms", rhos.len());
    inst.checks.push(Check::zero("ζ_ρ0(s0)ζ_ρ1(s1) − Σ_ρ ζ_ρ(s)", &lhs.sub(&rhs.truncate(n))));
    Ok(inst)
}

/// Optional parameters for catalog identities.
#[derive(Clone, Debug, Default)]
pub struct CatalogParams {
    pub s: Option<Composition>,
    /// Factors for `low-s-shuffle`.
    pub factors: Vec<Composition>,
    pub jumps: Option<JumpSet>,
    pub b: Option<u64>,
    pub k: Option<u64>,
    /// Largest `d` for `S_d`-level checks (default [`DEFAULT_D_MAX`]).
    pub d_max: Option<u32>,
}

/// `x = a·p^m` with `p ∤ a`: returns `a`.
fn p_free_part(x: u64, p: u64) -> u64 {
    let mut a = x;
    while a % p == 0 {
        a /= p;
    }
    a
}

/// Whether `S_d(a)·S_d(b) = S_d(a+b)` follows from the digit conditions.
fn merge_allowed(a: u64, b: u64, p: u64, q: u64) -> bool {
    [a, b, a + b].iter().all(|&x| p_free_part(x, p) <= q)
}

/// Classical quasi-shuffle (stuffle) product with multiplicities.
pub fn stuffle(u: &[u64], v: &[u64]) -> BTreeMap<Vec<u64>, u64> {
    let mut out = BTreeMap::new();
    if u.is_empty() || v.is_empty() {
        out.insert(if u.is_empty() { v.to_vec() } else { u.to_vec() }, 1);
        return out;
    }
    let mut push = |head: u64, rest: BTreeMap<Vec<u64>, u64>| {
        for (w, c) in rest {
            let mut x = vec![head];
            x.extend(w);
            *out.entry(x).or_insert(0) += c;
        }
    };
    push(u[0], stuffle(&u[1..], v));
    push(v[0], stuffle(u, &v[1..]));
    push(u[0] + v[0], stuffle(&u[1..], &v[1..]));
    out
}

fn stuffle_all(factors: &[Composition]) -> BTreeMap<Vec<u64>, u64> {
    let mut acc: BTreeMap<Vec<u64>, u64> = BTreeMap::from([(Vec::new(), 1)]);
    for fct in factors {
        let mut next = BTreeMap::new();
        for (w, c) in &acc {
            for (x, d) in stuffle(w, &fct.s) {
                *next.entry(x).or_insert(0) += c * d;
            }
        }
        acc = next;
    }
    acc
}

/// The sum over factors of their largest part: the bound on any merged slot.
fn slot_bound(factors: &[Composition]) -> u64 {
    factors.iter().map(|c| *c.s.iter().max().unwrap()).sum()
}

fn check_sd(
    inst: &mut IdentityInstance,
    mz: &mut MultiZeta,
    d_max: u32,
    n: i64,
    label: &str,
    terms: &[(i64, Vec<u64>)],
) -> Result<()> {
    let f = mz.field().clone();
    for d in 0..=d_max {
        let mut acc = TildeSeries::zero(&f, 0, n);
        for (c, ss) in terms {
            let c = f.from_int(*c);
            if c.is_zero() {
                continue;
            }
            let ds = vec![d; ss.len()];
            acc = acc.add(&mz.power_sums().multi(&ds, ss, n)?.scale_by(c));
        }
        inst.checks.push(Check::zero(format!("{label} at d={d}"), &acc.truncate(n)));
    }
    Ok(())
}

fn side(msg: String) -> Error {
    Error::SideCondition(msg)
}

/// Evaluates catalog identity `id` with parameters `params` to precision `n`.
pub fn verify_catalog(field: &Field, id: &str, params: &CatalogParams, n: i64) -> Result<IdentityInstance> {
    let p = field.p() as u64;
    let q = field.q() as u64;
    let d_max = params.d_max.unwrap_or(DEFAULT_D_MAX);
    let mut mz = MultiZeta::new(field);
    let mut inst = IdentityInstance::new(id, field, n);
    match id {
        "p-power" => {
            let s = params.s.clone().unwrap_or(Composition::new(vec![1, 2])?);
            let ps = Composition::new(s.s.iter().map(|x| x * p).collect())?;
            inst = inst.param("s", &s);
            let lhs = mz.zeta(&ps, n)?;
            let rhs = mz.zeta(&s, n)?.pow(p);
            inst.checks.push(Check::zero(format!("ζ{ps} − ζ{s}^{p}"), &lhs.sub(&rhs)));
            for d in 0..=d_max {
                let a = mz.s_d(d, s.s[0] * p, n)?;
                let b = mz.s_d(d, s.s[0], n)?.pow(p);
                inst.checks.push(Check::zero(format!("S_d({}) − S_d({})^{p} at d={d}", s.s[0] * p, s.s[0]), &a.sub(&b)));
            }
        }
        "even-rational" => {
            let list: Vec<u64> = match &params.s {
                Some(s) => s.s.clone(),
                None => vec![q - 1, 2 * (q - 1)],
            };
            inst = inst.param("s", list.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            for &s in &list {
                if s % (q - 1) != 0 {
                    return Err(side(format!("q − 1 = {} does not divide s = {s}", q - 1)));
                }
                // a denominator of degree up to s·q/(q−1) needs about 4·s·q coefficients
                let n_s = n.max((4 * s * q + 16 * (q - 1)) as i64);
                let (x, r) = even_zeta_ratio(field, s, n_s)?;
                inst.checks.push(Check {
                    label: format!("ζ({s})/π̃^{s} ∈ F_q(t)"),
                    kind: CheckKind::Rational,
                    passed: r.is_some(),
                    first_nonzero: x.valuation(),
                    lattice: x.w(),
                    detail: r.map(|r| format!("({})/({})", r.num().display("t"), r.den().display("t"))),
                });
            }
        }
        "low-s-shuffle" => {
            let groups: Vec<Vec<Composition>> = if params.factors.is_empty() {
                low_s_grid(q)
            } else {
                vec![params.factors.clone()]
            };
            for factors in &groups {
                let bound = slot_bound(factors);
                if bound > q {
                    return Err(side(format!(
                        "slot sums reach {bound} > q = {q} for factors {factors:?}"
                    )));
                }
                let mut lhs = TildeSeries::one(field).truncate(n);
                for fct in factors {
                    lhs = lhs.mul(&mz.zeta(fct, n)?);
                }
                let mut rhs = TildeSeries::zero(field, 0, n);
                for (w, c) in stuffle_all(factors) {
                    let c = field.from_int((c % p) as i64);
                    if !c.is_zero() {
                        rhs = rhs.add(&mz.zeta(&Composition::new(w)?, n)?.scale_by(c));
                    }
                }
                let names: Vec<String> = factors.iter().map(|c| format!("ζ{c}")).collect();
                inst.checks.push(Check::zero(
                    format!("{} − classical expansion", names.join("·")),
                    &lhs.sub(&rhs),
                ));
            }
            inst = inst.param("products", groups.len());
        }
        "degenerate-collapse" => {
            let s = params.s.clone().unwrap_or(Composition::new(vec![1, q - 1])?);
            let jumps = params.jumps.clone().unwrap_or(JumpSet::empty(s.depth()));
            if jumps.r != s.depth() {
                return Err(Error::InvalidArgument("jump set depth mismatch".into()));
            }
            inst = inst.param("s", &s).param(
                "I",
                format!("{{{}}}", jumps.set.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
            );
            let (merged, merges) = collapse(&s, &jumps, p, q)?;
            let lhs = mz.zeta_i(&s, &jumps, n)?;
            let rhs = mz.zeta(&merged, n)?;
            inst.checks.push(Check::zero(format!("ζ_I{s} − ζ{merged}"), &lhs.sub(&rhs)));
            for (a, b) in merges {
                check_sd(&mut inst, &mut mz, d_max, n, &format!("S_d({a})S_d({b}) − S_d({})", a + b), &[(1, vec![a, b]), (-1, vec![a + b])])?;
            }
        }
        "salvage" => {
            if !(q == 3 || p == 2) {
                return Err(side(format!("ζ(2)² = ζ(4) is stated for q = 3 or p = 2, not q = {q}")));
            }
            let z2 = mz.zeta(&Composition::new(vec![2])?, n)?;
            let z4 = mz.zeta(&Composition::new(vec![4])?, n)?;
            let z22 = mz.zeta(&Composition::new(vec![2, 2])?, n)?;
            inst.checks.push(Check::zero("ζ(2)² − ζ(4)", &z2.square().sub(&z4)));
            inst.checks.push(Check::nonzero("ζ(2,2)", &z22));
        }
        "naive-sum-shuffle" => {
            let terms = vec![
                (1, Monomial(vec![Atom::zeta(&[2]), Atom::zeta(&[2])])),
                (-2, single(Atom::zeta(&[2, 2]))),
                (-1, single(Atom::zeta(&[4]))),
            ];
            let x = combination(&mut mz, &terms, n)?;
            inst = inst.param("combination", describe(&terms));
            inst.checks.push(Check::zero(format!("{} = 0", describe(&terms)), &x));
        }
        "naive-integral-shuffle" => {
            let terms = vec![
                (1, Monomial(vec![Atom::zeta(&[2]), Atom::zeta(&[2])])),
                (-2, single(Atom::zeta(&[2, 2]))),
                (-4, single(Atom::zeta(&[3, 1]))),
            ];
            let x = combination(&mut mz, &terms, n)?;
            inst = inst.param("combination", describe(&terms));
            inst.checks.push(Check::zero(format!("{} = 0", describe(&terms)), &x));
        }
        "z-collapse" => {
            let list: Vec<Composition> = match &params.s {
                Some(s) => vec![s.clone()],
                None => Composition::all_of_weight(p, p as usize),
            };
            for s in &list {
                let total = s.weight();
                let ok = s.s.iter().all(|&x| p_free_part(x, p) <= q) && p_free_part(total, p) <= q;
                if !ok {
                    return Err(side(format!("parts of {s} or their sum exceed the digit bound q = {q}")));
                }
                let lhs = Atom::z(&s.s).value(&mut mz, n)?;
                let rhs = mz.zeta(&Composition::new(vec![total])?, n)?;
                inst.checks.push(Check::zero(format!("z{s} − z({total})"), &lhs.sub(&rhs)));
                let mut terms = vec![(1, s.s.clone())];
                terms.push((-1, vec![total]));
                check_sd(&mut inst, &mut mz, d_max, n, &format!("Π S_d{s} − S_d({total})"), &terms)?;
            }
            inst = inst.param("compositions", list.len());
        }
        "digit-cube" => {
            if p != 2 {
                return Err(side(format!("needs p = 2, got p = {p}")));
            }
            let b = params.b.ok_or_else(|| Error::InvalidArgument("digit-cube needs --b".into()))?;
            inst = inst.param("b", b);
            let (lhs_s, rhs_terms): (Vec<u64>, Vec<u64>) = if b % 4 == 3 && 3 * b < q {
                (vec![q + b; 3], vec![3 * q + 3 * b])
            } else if b % 4 == 1 && 2 * b < q {
                let mut r = vec![3 * q + b];
                r.extend(std::iter::repeat(1).take(2 * b as usize));
                (vec![q + b; 3], r)
            } else {
                return Err(side(format!(
                    "b = {b} must be 4k−1 with b < q/3 or 4k+1 with b < q/2 (q = {q})"
                )));
            };
            check_sd(&mut inst, &mut mz, d_max, n, "S_d(q+b)³ − rhs", &[(1, lhs_s.clone()), (-1, rhs_terms.clone())])?;
            let x = Atom::z(&lhs_s).value(&mut mz, n)?.sub(&Atom::z(&rhs_terms).value(&mut mz, n)?);
            inst.checks.push(Check::zero(
                format!("{} − {}", Atom::z(&lhs_s), Atom::z(&rhs_terms)),
                &x,
            ));
        }
        "digit-quartic" => {
            let b = params.b.ok_or_else(|| Error::InvalidArgument("digit-quartic needs --b".into()))?;
            let k = params.k.ok_or_else(|| Error::InvalidArgument("digit-quartic needs --k".into()))?;
            inst = inst.param("b", b).param("k", k);
            if p % 4 != 1 {
                return Err(side(format!("needs p ≡ 1 mod 4, got p = {p}")));
            }
            if !(0 < b && b < q) || (b * b + 1) % p != 0 {
                return Err(side(format!("needs 0 < b < q and b² ≡ −1 mod p, got b = {b}")));
            }
            let c = (k * p) as i64 - 2 - 2 * b as i64;
            if !(c > 0 && (c as u64) < q) {
                return Err(side(format!("needs q > kp − 2 − 2b > 0, got kp − 2 − 2b = {c}")));
            }
            let c = c as u64;
            let ones = |m: u64| std::iter::repeat(1u64).take(m as usize);
            let t1 = vec![q + b, q + b];
            let t2: Vec<u64> = [q + 1, q + 1].into_iter().chain(ones(2 * b - 2)).collect();
            let t3: Vec<u64> = [q + c].into_iter().chain(ones(q - c + 2 * b)).collect();
            let t4: Vec<u64> = ones(2 * q + 2 * b).collect();
            let coeff4 = p as i64 - 3;
            let terms = vec![(1, t1), (1, t2), (1, t3), (coeff4, t4)];
            check_sd(&mut inst, &mut mz, d_max, n, "quartic digit relation", &terms)?;
            let zterms: Vec<(i64, Monomial)> = terms.iter().map(|(c, s)| (*c, single(Atom::z(s)))).collect();
            let x = combination(&mut mz, &zterms, n)?;
            inst.checks.push(Check::zero(format!("{} = 0", describe(&zterms)), &x));
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown identity id {id:?}; known: {}",
                CATALOG_IDS.join(", ")
            )))
        }
    }
    Ok(inst)
}

/// `ζ(s)/π̃^s = ζ(s)·Ω(t)^s` from `ζ(s)` to precision `n`, and its reconstruction in `F_q(t)`.
pub fn even_zeta_ratio(field: &Field, s: u64, n: i64) -> Result<(TildeSeries, Option<RatFunc>)> {
    let q = field.q() as i64;
    let top = n + q * s as i64;
    let z = crate::mzv::zeta(field, &Composition::new(vec![s])?, n)?;
    let x = z.mul(&omega_at_t(field, top).pow(s)).truncate(top);
    let r = rational_reconstruct_auto(&x)?;
    Ok((x, r))
}

/// Merges every non-jump position of `s`, left to right, checking the digit conditions.
fn collapse(s: &Composition, jumps: &JumpSet, p: u64, q: u64) -> Result<(Composition, Vec<(u64, u64)>)> {
    let mut out = vec![s.s[0]];
    let mut merges = Vec::new();
    for i in 1..s.depth() {
        if jumps.set.contains(&i) {
            out.push(s.s[i]);
        } else {
            let a = *out.last().unwrap();
            let b = s.s[i];
            if !merge_allowed(a, b, p, q) {
                return Err(side(format!(
                    "no-jump position {i}: {a}, {b}, {} do not all have p-free part ≤ q",
                    a + b
                )));
            }
            merges.push((a, b));
            *out.last_mut().unwrap() += b;
        }
    }
    Ok((Composition::new(out)?, merges))
}

/// Pairs of factors of depth ≤ 2 whose slot sums stay within `q`.
fn low_s_grid(q: u64) -> Vec<Vec<Composition>> {
    let mut comps = Vec::new();
    for w in 1..=q {
        comps.extend(Composition::all_of_weight(w, 2));
    }
    let mut out = Vec::new();
    for (i, a) in comps.iter().enumerate() {
        for b in &comps[i..] {
            let f = vec![a.clone(), b.clone()];
            if slot_bound(&f) <= q {
                out.push(f);
            }
        }
    }
    out
}

/// Relations found by [`find_relations`].
#[derive(Clone, Debug)]
pub struct RelationReport {
    pub q: u32,
    pub weight: u64,
    pub max_depth: usize,
    pub basis: Vec<Monomial>,
    /// Reduced row echelon basis of the verified relation space, coefficients in `F_p`.
    pub relations: Vec<Vec<u32>>,
    pub precision: i64,
    pub verified_at: i64,
    /// Relations suggested at `precision` that did not survive `verified_at`.
    pub discarded: usize,
}

impl RelationReport {
    /// Whether `v` lies in the span of the reported relations.
    pub fn contains(&self, v: &[u32]) -> bool {
        let p = self.p();
        let mut rows = self.relations.clone();
        let rank = rref(&mut rows, p).len();
        rows.push(v.iter().map(|x| x % p).collect());
        rref(&mut rows, p).len() == rank
    }

    fn p(&self) -> u32 {
        let mut p = 2;
        while self.q % p != 0 {
            p += 1;
        }
        p
    }

    /// Index of a monomial in the basis.
    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.basis.iter().position(|b| b == m)
    }

    pub fn describe(&self, rel: &[u32]) -> String {
        let p = self.p() as i64;
        let terms: Vec<(i64, Monomial)> = rel
            .iter()
            .zip(&self.basis)
            .filter(|(c, _)| **c != 0)
            .map(|(&c, m)| {
                let c = c as i64;
                (if 2 * c > p { c - p } else { c }, m.clone())
            })
            .collect();
        describe(&terms)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q": self.q,
            "weight": self.weight,
            "maxDepth": self.max_depth,
            "basis": self.basis.iter().map(|m| m.descriptor()).collect::<Vec<_>>(),
            "relations": self.relations,
            "precision": self.precision,
            "verifiedAtPrecision": self.verified_at,
        })
    }
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Row-reduces in place and returns the pivot columns; zero rows are dropped.
fn rref(rows: &mut Vec<Vec<u32>>, p: u32) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = inv_mod(rows[rank][col], p);
        for x in rows[rank].iter_mut() {
            *x = (*x as u64 * inv as u64 % p as u64) as u32;
        }
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let c = row[col] as u64;
            for (x, &y) in row.iter_mut().zip(&pivot) {
                *x = ((*x as u64 + (p as u64 - c) * y as u64) % p as u64) as u32;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}

/// Basis of `{c : Σ_b c_b·row_b = 0}` over `F_p`.
fn left_nullspace(rows: &[Vec<u32>], p: u32) -> Vec<Vec<u32>> {
    let b = rows.len();
    // [row | identity], reduced on the row part
    let mut aug: Vec<Vec<u32>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..b).map(|j| (i == j) as u32));
            v
        })
        .collect();
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(pr) = (rank..b).find(|&i| aug[i][col] != 0) else {
            continue;
        };
        aug.swap(rank, pr);
        let inv = inv_mod(aug[rank][col], p);
        for x in aug[rank].iter_mut() {
            *x = (*x as u64 * inv as u64 % p as u64) as u32;
        }
        let pivot = aug[rank].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let c = row[col] as u64;
            for (x, &y) in row.iter_mut().zip(&pivot) {
                *x = ((*x as u64 + (p as u64 - c) * y as u64) % p as u64) as u32;
            }
        }
        rank += 1;
    }
    aug[rank..].iter().map(|r| r[width..].to_vec()).collect()
}

/// Canonical atoms of weight ≤ `max_weight` and depth ≤ `max_depth`.
pub fn atoms_up_to(max_weight: u64, max_depth: usize) -> Vec<Atom> {
    let mut set = BTreeSet::new();
    for w in 1..=max_weight {
        for s in Composition::all_of_weight(w, max_depth) {
            for j in JumpSet::all(s.depth()) {
                set.insert(Atom::from_jumps(&s, &j));
            }
        }
    }
    let mut v: Vec<Atom> = set.into_iter().collect();
    v.sort_by(|a, b| (a.weight(), a.depth(), &a.runs.len(), &a.runs).cmp(&(b.weight(), b.depth(), &b.runs.len(), &b.runs)));
    v
}

/// All products of atoms with total weight `weight`, in a fixed order.
pub fn monomial_basis(weight: u64, max_depth: usize) -> Vec<Monomial> {
    let atoms = atoms_up_to(weight, max_depth);
    let mut out = Vec::new();
    fn rec(atoms: &[Atom], start: usize, left: u64, cur: &mut Vec<Atom>, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(Monomial(cur.clone()));
            return;
        }
        for i in start..atoms.len() {
            let w = atoms[i].weight();
            if w > left {
                continue;
            }
            cur.push(atoms[i].clone());
            rec(atoms, i, left - w, cur, out);
            cur.pop();
        }
    }
    // larger atoms first so single values lead the basis
    let rev: Vec<Atom> = atoms.into_iter().rev().collect();
    rec(&rev, 0, weight, &mut Vec::new(), &mut out);
    out
}

fn coordinate_rows(field: &Field, basis: &[Monomial], n: i64) -> Result<Vec<Vec<u32>>> {
    let step = field.q() as i64 - 1;
    let mut mz = MultiZeta::new(field);
    let len = ((n + step - 1) / step) as usize;
    basis
        .iter()
        .map(|m| {
            let v = m.value(&mut mz, n)?;
            let mut row = Vec::with_capacity(len * field.m() as usize);
            for k in 0..len as i64 {
                row.extend(v.coordinate_window(k * step, 1));
            }
            Ok(row)
        })
        .collect()
}

/// Searches for `F_p`-linear relations among weight-`weight` monomials in
/// multizeta values of depth ≤ `max_depth`, using coefficients below `u^n`
/// and keeping only relations that still hold below `u^{2n}`.
pub fn find_relations(field: &Field, weight: u64, max_depth: usize, n: i64) -> Result<RelationReport> {
    find_relations_capped(field, weight, max_depth, n, DEFAULT_BASIS_CAP)
}

pub fn find_relations_capped(
    field: &Field,
    weight: u64,
    max_depth: usize,
    n: i64,
    cap: usize,
) -> Result<RelationReport> {
    if weight == 0 || max_depth == 0 {
        return Err(Error::InvalidArgument("weight and depth must be positive".into()));
    }
    let basis = monomial_basis(weight, max_depth);
    let q = field.q() as i64;
    if basis.len() > cap {
        return Err(Error::InvalidArgument(format!(
            "basis has {} monomials, cap is {cap}",
            basis.len()
        )));
    }
    let window = 3 * basis.len() as i64 * (q - 1);
    if n < window {
        return Err(Error::InsufficientPrecision(format!(
            "basis of {} monomials needs a window of at least {window}, got {n}",
            basis.len()
        )));
    }
    let p = field.p();
    let first = left_nullspace(&coordinate_rows(field, &basis, n)?, p);
    let verified = left_nullspace(&coordinate_rows(field, &basis, 2 * n)?, p);
    let mut rel = verified;
    rref(&mut rel, p);
    Ok(RelationReport {
        q: field.q(),
        weight,
        max_depth,
        basis,
        discarded: first.len() - rel.len(),
        relations: rel,
        precision: n,
        verified_at: 2 * n,
    })
}

/// Re-checks every reported relation at precision `n`; returns the indices that fail.
pub fn recheck_relations(field: &Field, report: &RelationReport, n: i64) -> Result<Vec<usize>> {
    let mut mz = MultiZeta::new(field);
    let values: Vec<TildeSeries> = report
        .basis
        .iter()
        .map(|m| m.value(&mut mz, n))
        .collect::<Result<_>>()?;
    let mut bad = Vec::new();
    for (k, rel) in report.relations.iter().enumerate() {
        let mut acc = TildeSeries::zero(field, 0, n);
        for (c, v) in rel.iter().zip(&values) {
            if *c != 0 {
                acc = acc.add(&v.scale_by(field.from_int(*c as i64)));
            }
        }
        if !acc.truncate(n).is_zero() {
            bad.push(k);
        }
    }
    Ok(bad)
}

/// `ζ_I(s)` as a preorder value, for callers holding a jump set.
pub fn preorder_of(jumps: &JumpSet) -> LinearPreorder {
    jumps_to_preorder(jumps)
}
