//! Dual t-motives attached to multizeta values.
//!
//! For `s = (s_1,…,s_r)` the rank `r+1` motive has
//! `Φ = Q^{(−1)}·[[T−t]]` and rigid analytic trivialization `Ψ = [[Ω]]·L`,
//! where `[[X]] = diag(X^{s_1+…+s_r}, X^{s_2+…+s_r}, …, X^{s_r}, 1)`, `Q` is
//! unit lower bidiagonal with `Q_{i+1,i} = H_{s_i−1}`, and `L` is the unit
//! lower triangular solution of
//! `L_{ij} = L_{ij}^{(1)} + Ω^{s_{i−1}}Q_{i,i−1}L_{i−1,j}^{(1)}`.
//!
//! Matrix indices in the public API are 1-based, as in the formulas.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mzv::{Composition, JumpSet, MultiZeta};
use crate::poly::TPoly;
use crate::powersums::PowerSums;
use crate::series::{TildeSeries, EXACT};
use crate::tseries::{Profile, TSeries};

/// Largest T-truncation the adaptive drivers try.
pub const MAX_T_TERMS: usize = 512;

/// A motive for one composition, optionally with delayed off-diagonal polynomials.
#[derive(Clone, Debug)]
pub struct MotiveBundle {
    field: Field,
    s: Composition,
    delays: Vec<u32>,
    /// `H_{s_k−1}` for each slot.
    h: Vec<TPoly>,
    /// `Q_{k+1,k}` as T-polynomials with exact series coefficients (delayed when `delays[k] > 0`).
    q_sub: Vec<Vec<TildeSeries>>,
    /// `Q_{k+1,k}^{(−1)}`.
    q_sub_inv_twist: Vec<Vec<TildeSeries>>,
    /// `e_i = s_i + … + s_r`, with `e_{r+1} = 0`.
    exps: Vec<u64>,
    m: usize,
    profile: Profile,
    /// `l[i][j]` for `j < i`, 0-based.
    l: Vec<Vec<TSeries>>,
    psi: Vec<Vec<TSeries>>,
}

/// Outcome of the uniformizability check `ΦΨ = Ψ^{(−1)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformCheck {
    pub holds: bool,
    /// Smallest `u`-precision (after the `t^j` weighting of evaluation) at which every entry was compared.
    pub checked_to: i64,
    /// First violating entry: `(i, j, T-index, scaled exponent, lattice)`.
    pub violation: Option<(usize, usize, usize, i64, u32)>,
}

impl MotiveBundle {
    pub fn composition(&self) -> &Composition {
        &self.s
    }
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn rank(&self) -> usize {
        self.s.depth() + 1
    }
    pub fn delays(&self) -> &[u32] {
        &self.delays
    }
    pub fn t_terms(&self) -> usize {
        self.m
    }
    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Exponent of `X` in the `i`-th diagonal entry of `[[X]]`.
    pub fn diag_exponent(&self, i: usize) -> u64 {
        self.exps[i - 1]
    }

    /// `Q_{i+1,i}` as a polynomial (undelayed slots only).
    pub fn q_poly(&self, i: usize) -> &TPoly {
        &self.h[i - 1]
    }

    /// `Q_{i+1,i}` with series coefficients (delayed slots included).
    pub fn q_entry(&self, i: usize) -> &[TildeSeries] {
        &self.q_sub[i - 1]
    }

    /// `Φ_{i+1,i} = Q_{i+1,i}^{(−1)}(T−t)^{e_i}` with series coefficients.
    pub fn phi_subdiagonal(&self, i: usize) -> Vec<TildeSeries> {
        let f = &self.field;
        let e = self.exps[i - 1];
        let base = &self.q_sub_inv_twist[i - 1];
        let mut out = base.clone();
        let t = TildeSeries::t_power(f, 1, 0);
        for _ in 0..e {
            let mut next = vec![TildeSeries::zero(f, 0, EXACT); out.len() + 1];
            for (l, c) in out.iter().enumerate() {
                next[l + 1] = next[l + 1].add(c);
                next[l] = next[l].sub(&c.mul(&t));
            }
            out = next;
        }
        out
    }

    /// `Φ_{i+1,i}` as an exact polynomial when `Q_{i+1,i}^{(−1)}` has coefficients in `F_q[t]`.
    pub fn phi_subdiagonal_poly(&self, i: usize) -> Option<TPoly> {
        if self.delays[i - 1] > 0 {
            return None;
        }
        let inv = self.h[i - 1].inverse_twist()?;
        Some(inv.mul(&TPoly::t_minus_theta(&self.field).pow(self.exps[i - 1] as u32)))
    }

    /// `L_{ij}` for `j < i`; requires [`MotiveBundle::solve_l`].
    pub fn l(&self, i: usize, j: usize) -> &TSeries {
        &self.l[i - 1][j - 1]
    }

    /// `Ψ_{ij}` for `j ≤ i`; requires [`MotiveBundle::assemble_psi`].
    pub fn psi(&self, i: usize, j: usize) -> &TSeries {
        &self.psi[i - 1][j - 1]
    }

    pub fn is_solved(&self) -> bool {
        !self.l.is_empty()
    }

    /// `Ω^{s_k}·Q_{k+1,k}·x`, truncated to the working profile (slot `k` 0-based).
    fn g_times(&self, k: usize, x: Option<&TSeries>) -> Result<TSeries> {
        let f = &self.field;
        let q = f.q() as i64;
        let s = self.s.s[k];
        let gain = s as i64 * q;
        let kpoly = &self.q_sub[k];
        let start = match x {
            None => TSeries::from_coeffs(f, kpoly.clone(), self.m).truncate(self.profile.shifted(-gain)),
            Some(x) => x.mul_tpoly(kpoly),
        };
        Ok(start.mul_omega_pow(s)?.truncate(self.profile))
    }

    /// `Σ_{k≥0} Y^{(k)}` to the working profile.
    fn twist_sum(&self, y: TSeries) -> Result<TSeries> {
        for (j, c) in y.coeffs().iter().enumerate() {
            if let Some(v) = c.valuation() {
                if v <= 0 {
                    return Err(Error::NonConvergent(format!(
                        "T^{j} coefficient of Ω^s·Q has valuation {v} ≤ 0"
                    )));
                }
            }
        }
        let mut acc = y.clone();
        let mut cur = y;
        loop {
            cur = cur.twist(1, Some(self.profile))?;
            if cur.coeffs().iter().all(|c| c.is_zero()) {
                break;
            }
            acc = acc.add(&cur);
        }
        Ok(acc.truncate(self.profile))
    }

    /// Loss of precision, in `u`-units, caused by multiplying by `Q_{k+1,k}`.
    fn q_loss(&self, k: usize) -> i64 {
        let slope = self.profile.slope;
        self.q_sub[k]
            .iter()
            .enumerate()
            .filter_map(|(l, c)| {
                c.valuation()
                    .map(|v| -(v.div_euclid((self.field.q() as i64).pow(c.w()))) + slope * l as i64)
            })
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Solves for `L` by the twisted-sum recursions.
    pub fn solve_l(&mut self) -> Result<()> {
        let r = self.s.depth();
        let q = self.field.q() as i64;
        let mut l: Vec<Vec<TSeries>> = vec![Vec::new(); r + 1];
        for i in 1..=r {
            let k = i - 1;
            let mut row = Vec::with_capacity(i);
            for j in 0..i {
                let y = if j == i - 1 {
                    self.g_times(k, None)?
                } else {
                    let gain = self.s.s[k] as i64 * q;
                    let need = self.profile.shifted(self.q_loss(k) - gain);
                    let x = l[i - 1][j].twist(1, Some(need))?;
                    self.g_times(k, Some(&x))?
                };
                row.push(self.twist_sum(y)?);
            }
            l[i] = row;
        }
        self.l = l;
        Ok(())
    }

    /// Independent evaluation of `L_{r+1,1} = Σ_{i_1>…>i_r≥0} (Ω^{s_r}Q_{r+1,r})^{(i_r)}⋯(Ω^{s_1}Q_{21})^{(i_1)}`.
    pub fn l_closed_form(&self) -> Result<TSeries> {
        let r = self.s.depth();
        // twists[k][i] = G_k^{(i)} until it vanishes at the working precision
        let mut twists: Vec<Vec<TSeries>> = Vec::with_capacity(r);
        for k in 0..r {
            let g = self.g_times(k, None)?;
            let mut list = vec![g.clone()];
            let mut cur = g;
            loop {
                cur = cur.twist(1, Some(self.profile))?;
                if cur.coeffs().iter().all(|c| c.is_zero()) {
                    break;
                }
                list.push(cur.clone());
            }
            twists.push(list);
        }
        let top = twists.iter().map(|t| t.len()).max().unwrap_or(0);
        let zero = TSeries::zero(&self.field, self.m, self.profile);
        // a[m + 1] = A_k(m) for m = −1..top: the sum over i_k > m
        let mut prev: Vec<TSeries> = (0..=top + 1).map(|_| TSeries::one(&self.field, self.m)).collect();
        for (k, tw) in twists.iter().enumerate() {
            let mut cur = vec![zero.clone(); top + 2];
            for m in (0..=top).rev() {
                // index m in `cur` stands for A_k(m − 1); adds the i_k = m term
                let term = match tw.get(m) {
                    Some(g) if k == 0 => g.clone(),
                    Some(g) => g.mul(&prev[m + 1]).truncate(self.profile),
                    None => zero.clone(),
                };
                cur[m] = cur[m + 1].add(&term);
            }
            prev = cur;
        }
        Ok(prev.swap_remove(0))
    }

    /// Residual of the defining recursion of `L`: first `(i, j, T-index, exponent)` where it fails.
    pub fn recursion_residual(&self) -> Result<Option<(usize, usize, usize, i64)>> {
        let r = self.s.depth();
        let q = self.field.q() as i64;
        for i in 1..=r {
            for j in 0..i {
                let lij = &self.l[i][j];
                let mut rhs = lij.twist(1, Some(self.profile))?;
                let y = if j == i - 1 {
                    self.g_times(i - 1, None)?
                } else {
                    let gain = self.s.s[i - 1] as i64 * q;
                    let need = self.profile.shifted(self.q_loss(i - 1) - gain);
                    let x = self.l[i - 1][j].twist(1, Some(need))?;
                    self.g_times(i - 1, Some(&x))?
                };
                rhs = rhs.add(&y);
                if let Some((t, e)) = lij.first_difference(&rhs) {
                    return Ok(Some((i + 1, j + 1, t, e)));
                }
            }
        }
        Ok(None)
    }

    /// `Ψ = [[Ω]]·L`.
    pub fn assemble_psi(&mut self) -> Result<()> {
        if !self.is_solved() {
            self.solve_l()?;
        }
        let r = self.s.depth();
        let f = self.field.clone();
        let q = f.q() as i64;
        let mut psi = Vec::with_capacity(r + 1);
        for i in 0..=r {
            let e = self.exps[i];
            let mut row = Vec::with_capacity(i + 1);
            for j in 0..=i {
                let x = if j == i {
                    let start = self.profile.shifted(-(e as i64) * q);
                    let mut z = TSeries::zero(&f, self.m, start);
                    let mut c = z.clone().into_coeffs();
                    c[0] = TildeSeries::one(&f).truncate(start.at(0));
                    z = TSeries::from_coeffs(&f, c, self.m);
                    z
                } else {
                    self.l[i][j].clone()
                };
                row.push(x.mul_omega_pow(e)?);
            }
            psi.push(row);
        }
        self.psi = psi;
        Ok(())
    }

    /// Checks `ΦΨ = Ψ^{(−1)}` entrywise.
    pub fn check_uniformizability(&self) -> Result<UniformCheck> {
        let r = self.s.depth();
        let q = self.field.q() as i64;
        let mut checked_to = EXACT;
        for i in 0..=r {
            for j in 0..=i {
                let mut lhs = self.psi[i][j].mul_t_minus_theta_pow(self.exps[i] as u32);
                if i > j {
                    let below = self.psi[i - 1][j].mul_t_minus_theta_pow(self.exps[i - 1] as u32);
                    lhs = lhs.add(&below.mul_tpoly(&self.q_sub_inv_twist[i - 1]));
                }
                let rhs = self.psi[i][j].twist(-1, None)?;
                let m = lhs.len().min(rhs.len());
                for t in 0..m {
                    let (a, b) = (lhs.coeff(t), rhs.coeff(t));
                    if let Some(e) = a.first_difference(b) {
                        return Ok(UniformCheck {
                            holds: false,
                            checked_to,
                            violation: Some((i + 1, j + 1, t, e, a.w().max(b.w()))),
                        });
                    }
                    let p = u_precision(a).min(u_precision(b));
                    checked_to = checked_to.min(p.saturating_sub((q - 1) * t as i64));
                }
            }
        }
        Ok(UniformCheck {
            holds: true,
            checked_to,
            violation: None,
        })
    }

    /// `Ψ|_{T=t}` to absolute `u`-precision `n`, as a lower-triangular matrix.
    pub fn psi_at_t(&self, n: i64) -> Result<Vec<Vec<TildeSeries>>> {
        self.psi
            .iter()
            .map(|row| row.iter().map(|x| eval_u(x, n)).collect())
            .collect()
    }

    /// `L_{ij}|_{T=t}` to absolute `u`-precision `n`.
    pub fn l_at_t(&self, i: usize, j: usize, n: i64) -> Result<TildeSeries> {
        eval_u(self.l(i, j), n)
    }
}

/// Precision of `x` in `u`-units (rounded down).
fn u_precision(x: &TildeSeries) -> i64 {
    if x.is_exact() {
        return EXACT;
    }
    x.precision().div_euclid(x.scale())
}

/// Evaluation at `T = t` with the target measured in `u`-units.
pub fn eval_u(x: &TSeries, n: i64) -> Result<TildeSeries> {
    let q = x.field().q() as i64;
    let w = x.coeffs().iter().map(|c| c.w()).max().unwrap_or(0);
    Ok(x.eval_at_t(n * q.pow(w))?.normalize())
}

fn exponents(s: &Composition) -> Vec<u64> {
    let r = s.depth();
    let mut e = vec![0u64; r + 1];
    for i in (0..r).rev() {
        e[i] = e[i + 1] + s.s[i];
    }
    e
}

/// Delays realizing `ζ` summed over weak inequalities off the jump set:
/// slot `k` gets `#{j ∉ I : k ≤ j ≤ r−1}`.
pub fn cumulative_delays(jumps: &JumpSet) -> Vec<u32> {
    let r = jumps.r;
    (1..=r)
        .map(|k| (k..r).filter(|j| !jumps.set.contains(j)).count() as u32)
        .collect()
}

fn build(
    field: &Field,
    s: &Composition,
    delays: Vec<u32>,
    m: usize,
    profile: Profile,
    ps: &mut PowerSums,
) -> Result<MotiveBundle> {
    let r = s.depth();
    let mut h = Vec::with_capacity(r);
    let mut q_sub = Vec::with_capacity(r);
    let mut q_inv = Vec::with_capacity(r);
    for k in 0..r {
        let hs = ps.carlitz().h(s.s[k] as usize - 1)?;
        let entry: Vec<TildeSeries> = if delays[k] == 0 {
            hs.coeffs().iter().map(|c| TildeSeries::from_poly(c, 0)).collect()
        } else {
            ps.interpolation_poly(s.s[k], delays[k])?
        };
        let inv = entry
            .iter()
            .map(|c| c.twist(-1))
            .collect::<Result<Vec<_>>>()?;
        h.push(hs);
        q_sub.push(entry);
        q_inv.push(inv);
    }
    Ok(MotiveBundle {
        field: field.clone(),
        s: s.clone(),
        delays,
        h,
        q_sub,
        q_sub_inv_twist: q_inv,
        exps: exponents(s),
        m,
        profile,
        l: Vec::new(),
        psi: Vec::new(),
    })
}

/// Profile whose coefficient `j` carries `base + slope·j` units of precision.
pub fn motive_profile(field: &Field, base: i64, slope_factor: i64) -> Profile {
    Profile {
        w: 0,
        base,
        slope: (field.q() as i64 - 1) * slope_factor,
    }
}

/// Assembles `Φ`, `Q`, `[[T−t]]`, `[[Ω]]` with `m` T-coefficients and working precision `n`.
pub fn build_motive(field: &Field, s: &Composition, m: usize, n: i64) -> Result<MotiveBundle> {
    let mut ps = PowerSums::new(field);
    build(field, s, vec![0; s.depth()], m, motive_profile(field, n, 1), &mut ps)
}

/// Motive whose off-diagonal entries use delayed polynomials, so that the
/// bottom-left period sums over degrees weakly decreasing off the jump set `I`.
pub fn degenerate_motive(
    field: &Field,
    s: &Composition,
    jumps: &JumpSet,
    m: usize,
    n: i64,
) -> Result<MotiveBundle> {
    if jumps.r != s.depth() {
        return Err(Error::InvalidArgument("jump set depth mismatch".into()));
    }
    let mut ps = PowerSums::new(field);
    build(field, s, cumulative_delays(jumps), m, motive_profile(field, n, 1), &mut ps)
}

/// Solved bundle whose `L` and `Ψ` evaluate at `T = t` to precision `n_eval`
/// and satisfy the `ΦΨ = Ψ^{(−1)}` comparison down to `n_check` (0 to skip).
pub fn solve_adaptive(
    field: &Field,
    s: &Composition,
    delays: &[u32],
    n_eval: i64,
    n_check: i64,
) -> Result<MotiveBundle> {
    let q = field.q() as i64;
    let mut ps = PowerSums::new(field);
    let weight = s.weight() as i64;
    let slope_factor = if n_check > 0 { q } else { 1 };
    let mut base = n_eval.max(q * n_check) + 2 * q * (q + weight);
    let mut m = 8usize;
    let mut last_err = None;
    for _ in 0..16 {
        if m > MAX_T_TERMS {
            break;
        }
        let profile = motive_profile(field, base, slope_factor);
        let mut b = build(field, s, delays.to_vec(), m, profile, &mut ps)?;
        let outcome = b.assemble_psi().and_then(|_| {
            for i in 1..=b.rank() {
                for j in 1..=i {
                    eval_u(b.psi(i, j), n_eval)?;
                    if j < i {
                        b.l_at_t(i, j, n_eval)?;
                    }
                }
            }
            if n_check > 0 {
                let c = b.check_uniformizability()?;
                if c.holds && c.checked_to < n_check {
                    return Err(Error::InsufficientPrecision(format!(
                        "uniformizability compared only to {}",
                        c.checked_to
                    )));
                }
            }
            Ok(())
        });
        match outcome {
            Ok(()) => return Ok(b),
            Err(Error::NonConvergent(msg)) if msg.contains("T^") && !msg.contains("≤ 0") => {
                m *= 2;
                last_err = Some(Error::NonConvergent(msg));
            }
            Err(Error::NonConvergent(msg)) if msg.starts_with("need at least") => {
                m *= 2;
                last_err = Some(Error::NonConvergent(msg));
            }
            Err(Error::InsufficientPrecision(msg)) => {
                base += base / 2 + 8;
                last_err = Some(Error::InsufficientPrecision(msg));
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NonConvergent("T-truncation limit reached".into())))
}

/// Uniformizability check at evaluation precision `n` with adaptive truncation.
pub fn assemble_psi_and_check(field: &Field, s: &Composition, n: i64) -> Result<(MotiveBundle, UniformCheck)> {
    let b = solve_adaptive(field, s, &vec![0; s.depth()], n, n)?;
    let c = b.check_uniformizability()?;
    Ok((b, c))
}

/// A signed sum of products of `Z` labels; each label is an interval `[a, b]` of slots (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZExpr {
    pub terms: Vec<(i8, Vec<(usize, usize)>)>,
}

impl ZExpr {
    /// Entry `(i, j)` of the inverse of the unit lower-triangular matrix with
    /// `(i, k)` entry `Z_{k…i−1}`: signed sum over splittings of `[j, i−1]` into intervals.
    pub fn inverse_entry(i: usize, j: usize) -> ZExpr {
        if i == j {
            return ZExpr {
                terms: vec![(1, Vec::new())],
            };
        }
        let len = i - j;
        let mut terms = Vec::new();
        // bit b set = cut after position j + b
        for mask in 0u32..(1 << (len - 1)) {
            let mut pieces = Vec::new();
            let mut start = j;
            for b in 0..len - 1 {
                if mask & (1 << b) != 0 {
                    pieces.push((start, j + b));
                    start = j + b + 1;
                }
            }
            pieces.push((start, i - 1));
            let sign = if pieces.len() % 2 == 1 { -1 } else { 1 };
            terms.push((sign, pieces));
        }
        // positive terms first, then by number of factors, then lexicographically
        terms.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.len().cmp(&b.1.len())).then(a.1.cmp(&b.1)));
        ZExpr { terms }
    }

    /// The label `Z_{a…b}` alone.
    pub fn single(a: usize, b: usize) -> ZExpr {
        ZExpr {
            terms: vec![(1, vec![(a, b)])],
        }
    }

    pub fn evaluate(&self, z: &BTreeMap<(usize, usize), TildeSeries>, one: &TildeSeries) -> TildeSeries {
        let mut acc: Option<TildeSeries> = None;
        for (sign, pieces) in &self.terms {
            let mut term = one.clone();
            for p in pieces {
                term = term.mul(&z[p]);
            }
            if *sign < 0 {
                term = term.neg();
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc.unwrap_or_else(|| one.scale_by(crate::field::Fq::ZERO))
    }
}

fn label(a: usize, b: usize) -> String {
    let mut s = String::from("Z");
    for k in a..=b {
        if b >= 10 && k > a {
            s.push('_');
        }
        s.push_str(&k.to_string());
    }
    s
}

impl fmt::Display for ZExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (sign, pieces)) in self.terms.iter().enumerate() {
            let body = if pieces.is_empty() {
                "1".to_string()
            } else {
                pieces.iter().map(|&(a, b)| label(a, b)).collect::<Vec<_>>().join("*")
            };
            match (n, *sign) {
                (0, s) if s < 0 => write!(f, "-{body}")?,
                (0, _) => write!(f, "{body}")?,
                (_, s) if s < 0 => write!(f, " - {body}")?,
                _ => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

/// The normalized period matrices and their symbolic descriptions.
#[derive(Clone, Debug)]
pub struct NormalizedPeriods {
    pub s: Composition,
    pub precision: i64,
    /// `Ψ|_{T=t}`.
    pub psi_at_t: Vec<Vec<TildeSeries>>,
    /// `ψ′_{ij} = Ψ_{ij}|_{T=t}·π̃^{s_j+…+s_r}`.
    pub psi_prime: Vec<Vec<TildeSeries>>,
    /// `p′ = (ψ′)^{−1}`.
    pub p_prime: Vec<Vec<TildeSeries>>,
    pub psi_expr: Vec<Vec<ZExpr>>,
    pub p_expr: Vec<Vec<ZExpr>>,
    /// `Z_{a…b} = Γ_{s_a}⋯Γ_{s_b}·ζ(s_a,…,s_b)` from the multizeta module.
    pub z_values: BTreeMap<(usize, usize), TildeSeries>,
    /// `ψ′` agrees entrywise with the `Z` values.
    pub psi_matches_z: bool,
    /// `p′` agrees entrywise with its `Z`-expression.
    pub p_matches_expr: bool,
    /// `p′_{i1} = −(p′_{i2}Z_1 + … + p′_{ii}Z_{1…i−1})` for every `i ≥ 2`.
    pub first_column_recursion: bool,
}

/// `Γ_{s_a}⋯Γ_{s_b}·ζ(s_a,…,s_b)` for every interval, to absolute precision `n`.
pub fn z_values(field: &Field, s: &Composition, n: i64) -> Result<BTreeMap<(usize, usize), TildeSeries>> {
    let q = field.q() as i64;
    let r = s.depth();
    let mut mz = MultiZeta::new(field);
    let mut out = BTreeMap::new();
    for a in 1..=r {
        for b in a..=r {
            let sub = Composition::new(s.s[a - 1..b].to_vec())?;
            let mut gamma = crate::poly::PolyT::one(field);
            for k in a..=b {
                gamma = gamma.mul(&mz.power_sums().carlitz().gamma(s.s[k - 1])?);
            }
            let dg = gamma.degree().unwrap() as i64;
            let z = mz.zeta(&sub, n + (q - 1) * dg)?;
            out.insert((a, b), z.mul(&TildeSeries::from_poly(&gamma, 0)).truncate(n));
        }
    }
    Ok(out)
}

fn invert_unit_lower(m: &[Vec<TildeSeries>]) -> Vec<Vec<TildeSeries>> {
    let n = m.len();
    let f = m[0][0].field().clone();
    let mut inv: Vec<Vec<TildeSeries>> = vec![Vec::new(); n];
    for i in 0..n {
        let mut row = vec![TildeSeries::zero(&f, 0, EXACT); i + 1];
        row[i] = TildeSeries::one(&f);
        for j in (0..i).rev() {
            // (M·X)_{ij} = 0: X_{ij} = −Σ_{k=j}^{i−1} M_{ik} X_{kj}
            let mut acc = TildeSeries::zero(&f, 0, EXACT);
            for k in j..i {
                acc = acc.add(&m[i][k].mul(&inv[k][j]));
            }
            row[j] = acc.neg();
        }
        inv[i] = row;
    }
    inv
}

/// Period matrix `Ψ^{−1}|_{T=t}` in normalized form, with all consistency checks, to precision `n`.
pub fn period_matrix(field: &Field, s: &Composition, n: i64) -> Result<NormalizedPeriods> {
    let q = field.q() as i64;
    let e = exponents(s);
    let r = s.depth();
    // π̃^{e} has valuation −q·e
    let n_eval = n + q * e[0] as i64 + 2 * q;
    let b = solve_adaptive(field, s, &vec![0; r], n_eval, 0)?;
    let psi = b.psi_at_t(n_eval)?;
    let pi = crate::carlitz::pi_tilde(field, n_eval + 2 * q * (e[0] as i64 + 1));
    let mut psi_prime = Vec::with_capacity(r + 1);
    for (i, row) in psi.iter().enumerate() {
        let mut out = Vec::with_capacity(i + 1);
        for (j, x) in row.iter().enumerate() {
            let y = if i == j {
                TildeSeries::one(field)
            } else {
                x.mul(&pi.pow(e[j])).truncate(n)
            };
            if y.precision() < n {
                return Err(Error::InsufficientPrecision(format!(
                    "ψ′ entry ({}, {}) known only to {}",
                    i + 1,
                    j + 1,
                    y.precision()
                )));
            }
            out.push(y);
        }
        psi_prime.push(out);
    }
    let p_prime: Vec<Vec<TildeSeries>> = invert_unit_lower(&psi_prime)
        .into_iter()
        .map(|row| row.into_iter().map(|x| x.truncate(n)).collect())
        .collect();
    let psi_expr: Vec<Vec<ZExpr>> = (1..=r + 1)
        .map(|i| {
            (1..=i)
                .map(|j| {
                    if i == j {
                        ZExpr::inverse_entry(i, i)
                    } else {
                        ZExpr::single(j, i - 1)
                    }
                })
                .collect()
        })
        .collect();
    let p_expr: Vec<Vec<ZExpr>> = (1..=r + 1)
        .map(|i| (1..=i).map(|j| ZExpr::inverse_entry(i, j)).collect())
        .collect();
    // products of Z's lose the Γ degrees as precision
    let mut gdeg = 0i64;
    let mut ps = PowerSums::new(field);
    for &si in &s.s {
        gdeg += ps.carlitz().gamma(si)?.degree().unwrap() as i64;
    }
    let zv = z_values(field, s, n + (q - 1) * gdeg)?;
    let one = TildeSeries::one(field);
    let mut psi_ok = true;
    let mut p_ok = true;
    for i in 0..=r {
        for j in 0..i {
            let expect = psi_expr[i][j].evaluate(&zv, &one).truncate(n);
            psi_ok &= psi_prime[i][j].first_difference(&expect).is_none();
            let expect = p_expr[i][j].evaluate(&zv, &one).truncate(n);
            p_ok &= p_prime[i][j].first_difference(&expect).is_none();
        }
    }
    let mut rec_ok = true;
    for i in 1..=r {
        // 0-based row i: p′_{i,0} = −Σ_{k=1}^{i} p′_{i,k}·Z_{1…k}
        let mut acc = TildeSeries::zero(field, 0, EXACT);
        for k in 1..=i {
            acc = acc.add(&p_prime[i][k].mul(&zv[&(1, k)]));
        }
        rec_ok &= p_prime[i][0].add(&acc).truncate(n).is_zero();
    }
    Ok(NormalizedPeriods {
        s: s.clone(),
        precision: n,
        psi_at_t: psi,
        psi_prime,
        p_prime,
        psi_expr,
        p_expr,
        z_values: zv,
        psi_matches_z: psi_ok,
        p_matches_expr: p_ok,
        first_column_recursion: rec_ok,
    })
}

/// Shift law: the lower-right block of `ψ′(s)` from row/column `k+1` on equals `ψ′` of `(s_{k+1},…,s_r)`.
pub fn check_shift_law(a: &NormalizedPeriods, b: &NormalizedPeriods, k: usize) -> bool {
    let r = a.s.depth();
    if b.s.s[..] != a.s.s[k..] {
        return false;
    }
    for i in k..=r {
        for j in k..=i {
            let (x, y) = (&a.psi_prime[i][j], &b.psi_prime[i - k][j - k]);
            if x.first_difference(y).is_some() {
                return false;
            }
            let (x, y) = (&a.p_prime[i][j], &b.p_prime[i - k][j - k]);
            if x.first_difference(y).is_some() {
                return false;
            }
        }
    }
    true
}

/// `Π Γ_{s_i}·ζ_I(s)/π̃^{Σs_i}` from degenerate motives: the bottom-left entry of
/// the motive for jump set `J` sums `ζ_{J′}` over `J′ ⊇ J`, and Möbius inversion over
/// `J ⊇ I` isolates `ζ_I`. Also returns the bundles' uniformizability checks.
pub fn degenerate_value(
    field: &Field,
    s: &Composition,
    jumps: &JumpSet,
    n: i64,
) -> Result<(TildeSeries, Vec<UniformCheck>)> {
    let r = s.depth();
    if jumps.r != r {
        return Err(Error::InvalidArgument("jump set depth mismatch".into()));
    }
    let free: Vec<usize> = (1..r).filter(|j| !jumps.set.contains(j)).collect();
    let mut acc = TildeSeries::zero(field, 0, EXACT);
    let mut checks = Vec::new();
    for mask in 0u32..(1 << free.len()) {
        let mut set: Vec<usize> = jumps.set.iter().copied().collect();
        let mut extra = 0;
        for (b, &j) in free.iter().enumerate() {
            if mask & (1 << b) != 0 {
                set.push(j);
                extra += 1;
            }
        }
        let jset = JumpSet::new(r, set)?;
        let delays = cumulative_delays(&jset);
        let b = solve_adaptive(field, s, &delays, n, 0)?;
        checks.push(b.check_uniformizability()?);
        let v = b.l_at_t(r + 1, 1, n)?;
        acc = if extra % 2 == 0 { acc.add(&v) } else { acc.sub(&v) };
    }
    Ok((acc.truncate(n), checks))
}

/// Per-`s` result of the integrality test for `Φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralityRow {
    pub s: usize,
    pub integral: bool,
}

/// Whether every `t`-coefficient of `p` is a `q`-th power, i.e. `p^{(−1)} ∈ F_q[t][T]`.
pub fn is_twist_integral(p: &TPoly) -> bool {
    p.inverse_twist().is_some()
}

/// Tests `H_s^{(−1)} ∈ F_q[t][T]` for `s ≤ s_max`.
pub fn phi_integrality_check(field: &Field, s_max: usize) -> Result<Vec<IntegralityRow>> {
    let mut ps = PowerSums::new(field);
    let table = ps.carlitz().h_table(s_max)?;
    Ok(table
        .iter()
        .enumerate()
        .map(|(s, h)| IntegralityRow {
            s,
            integral: is_twist_integral(h),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field_context;

    #[test]
    fn inverse_entry_expressions() {
        assert_eq!(ZExpr::inverse_entry(2, 1).to_string(), "-Z1");
        assert_eq!(ZExpr::inverse_entry(3, 1).to_string(), "Z1*Z2 - Z12");
        assert_eq!(
            ZExpr::inverse_entry(4, 1).to_string(),
            "Z1*Z23 + Z12*Z3 - Z123 - Z1*Z2*Z3"
        );
        assert_eq!(ZExpr::inverse_entry(4, 2).to_string(), "Z2*Z3 - Z23");
    }

    #[test]
    fn delays_from_jumps() {
        assert_eq!(cumulative_delays(&JumpSet::full(3)), vec![0, 0, 0]);
        assert_eq!(cumulative_delays(&JumpSet::empty(3)), vec![2, 1, 0]);
        assert_eq!(cumulative_delays(&JumpSet::new(3, [2]).unwrap()), vec![1, 0, 0]);
    }

    #[test]
    fn depth_one_uniformizable_and_matches_zeta() {
        let f = make_field_context(3, 1).unwrap();
        let s = Composition::new(vec![2]).unwrap();
        let (b, c) = assemble_psi_and_check(&f, &s, 40).unwrap();
        assert!(c.holds, "{c:?}");
        assert!(b.recursion_residual().unwrap().is_none());
        let per = period_matrix(&f, &s, 40).unwrap();
        assert!(per.psi_matches_z && per.p_matches_expr && per.first_column_recursion);
    }

    #[test]
    fn integrality_small() {
        let f = make_field_context(2, 1).unwrap();
        let rows = phi_integrality_check(&f, 6).unwrap();
        assert!(rows.iter().all(|r| r.integral));
    }
}
