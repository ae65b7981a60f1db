//! Power series in `T` whose coefficients are [`TildeSeries`].
//!
//! Every coefficient carries its own precision. Callers describe the
//! precision they need with a [`Profile`]: coefficient `j` is wanted to
//! scaled precision `base + slope·j`, which is what evaluation at `T = t`
//! consumes (the factor `t^j` costs `(q−1)j` units of `u`-adic precision).

use crate::error::{Error, Result};
use crate::field::{binomial_mod_p, Field, Fq};
use crate::series::{sadd, TildeSeries, DEFAULT_LATTICE_CAP, EXACT};

/// Per-coefficient precision targets at lattice `w`: `base + slope·j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Profile {
    pub w: u32,
    pub base: i64,
    pub slope: i64,
}

impl Profile {
    /// The profile needed to evaluate at `T = t` to precision `n` (lattice `w`).
    pub fn for_eval(field: &Field, w: u32, n: i64) -> Self {
        let scale = (field.q() as i64).pow(w);
        Profile {
            w,
            base: n,
            slope: (field.q() as i64 - 1) * scale,
        }
    }

    pub fn at(&self, j: usize) -> i64 {
        sadd(self.base, self.slope * j as i64)
    }

    pub fn shifted(&self, delta: i64) -> Self {
        Profile {
            base: self.base + delta,
            ..*self
        }
    }
}

#[derive(Clone, Debug)]
pub struct TSeries {
    field: Field,
    coeffs: Vec<TildeSeries>,
}

impl TSeries {
    /// `M` coefficients, each zero to the profile's precision.
    pub fn zero(field: &Field, m: usize, profile: Profile) -> Self {
        TSeries {
            field: field.clone(),
            coeffs: (0..m)
                .map(|j| TildeSeries::zero(field, profile.w, profile.at(j)))
                .collect(),
        }
    }

    /// A T-polynomial with exact coefficients, truncated at `T^m`.
    pub fn from_coeffs(field: &Field, mut coeffs: Vec<TildeSeries>, m: usize) -> Self {
        coeffs.truncate(m);
        while coeffs.len() < m {
            coeffs.push(TildeSeries::zero(field, 0, EXACT));
        }
        TSeries {
            field: field.clone(),
            coeffs,
        }
    }

    /// The constant `1` truncated at `T^m`.
    pub fn one(field: &Field, m: usize) -> Self {
        Self::from_coeffs(field, vec![TildeSeries::one(field)], m)
    }

    /// `T − t`, truncated at `T^m`.
    pub fn t_minus_theta(field: &Field, m: usize) -> Self {
        let t = TildeSeries::t_power(field, 1, 0);
        Self::from_coeffs(field, vec![t.neg(), TildeSeries::one(field)], m)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn coeff(&self, j: usize) -> &TildeSeries {
        &self.coeffs[j]
    }
    pub fn coeffs(&self) -> &[TildeSeries] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<TildeSeries> {
        self.coeffs
    }

    /// Truncates coefficient `j` to `profile.at(j)` (scaled at the coefficient's lattice
    /// after lifting to `profile.w` if needed).
    pub fn truncate(&self, profile: Profile) -> Self {
        TSeries {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| truncate_at(c, profile, j))
                .collect(),
        }
    }

    /// Keeps only the first `m` T-coefficients.
    pub fn truncate_len(&self, m: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.truncate(m);
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.len().min(other.len());
        TSeries {
            field: self.field.clone(),
            coeffs: (0..m).map(|j| self.coeffs[j].add(&other.coeffs[j])).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let m = self.len().min(other.len());
        TSeries {
            field: self.field.clone(),
            coeffs: (0..m).map(|j| self.coeffs[j].sub(&other.coeffs[j])).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        TSeries {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    /// Multiplies every coefficient by a scalar series.
    pub fn scale(&self, x: &TildeSeries) -> Self {
        TSeries {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(x)).collect(),
        }
    }

    /// General product, truncated at the shorter length.
    pub fn mul(&self, other: &Self) -> Self {
        let m = self.len().min(other.len());
        let coeffs = (0..m)
            .map(|j| {
                let mut acc: Option<TildeSeries> = None;
                for k in 0..=j {
                    let term = self.coeffs[k].mul(&other.coeffs[j - k]);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term),
                    });
                }
                acc.unwrap()
            })
            .collect();
        TSeries {
            field: self.field.clone(),
            coeffs,
        }
    }

    /// Product with a T-polynomial whose coefficients are (usually exact) series.
    pub fn mul_tpoly(&self, p: &[TildeSeries]) -> Self {
        let m = self.len();
        let coeffs = (0..m)
            .map(|j| {
                let mut acc: Option<TildeSeries> = None;
                for (l, pl) in p.iter().enumerate().take(j + 1) {
                    if pl.is_zero() && pl.is_exact() {
                        continue;
                    }
                    let term = pl.mul(&self.coeffs[j - l]);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term),
                    });
                }
                acc.unwrap_or_else(|| {
                    let w = self.coeffs[j].w();
                    TildeSeries::zero(&self.field, w, EXACT)
                })
            })
            .collect();
        TSeries {
            field: self.field.clone(),
            coeffs,
        }
    }

    /// Multiplies by `(T − t)^n`.
    pub fn mul_t_minus_theta_pow(&self, n: u32) -> Self {
        let mut s = self.clone();
        let t = TildeSeries::t_power(&self.field, 1, 0);
        for _ in 0..n {
            let mut next = Vec::with_capacity(s.len());
            for j in 0..s.len() {
                let mut c = s.coeffs[j].mul(&t).neg();
                if j > 0 {
                    c = c.add(&s.coeffs[j - 1]);
                }
                next.push(c);
            }
            s.coeffs = next;
        }
        s
    }

    /// Multiplies by `Ω^n = u^{nq}·Π_{i≥1}(1 + T·u^{(q−1)q^i})^n`. Factors are
    /// applied while they can still affect a coefficient below its precision,
    /// so every coefficient must carry finite precision.
    pub fn mul_omega_pow(&self, n: u64) -> Result<Self> {
        if n == 0 {
            return Ok(self.clone());
        }
        let f = &self.field;
        let q = f.q() as i64;
        let w = self.coeffs.iter().map(|c| c.w()).max().unwrap_or(0);
        let scale = q.pow(w);
        let binoms: Vec<Fq> = (0..=n.min(self.len() as u64))
            .map(|k| Fq(binomial_mod_p(n, k, f.p()) as u16))
            .collect();
        let mut coeffs: Vec<TildeSeries> = self
            .coeffs
            .iter()
            .map(|c| c.lift(w).mul_monomial(Fq::ONE, n as i64 * q * scale))
            .collect();
        // exact zeros stay exact; any other exact coefficient would need the full product
        let max_prec = coeffs
            .iter()
            .filter(|c| !(c.is_exact() && c.is_zero()))
            .map(|c| c.precision())
            .max()
            .unwrap_or(0);
        if max_prec >= EXACT {
            return Err(Error::InsufficientPrecision(
                "Ω-power of an exact T-series needs a precision profile".into(),
            ));
        }
        let mut qi = q;
        loop {
            let step = (q - 1) * qi * scale;
            let min_val = coeffs.iter().map(|c| c.val_bound()).min().unwrap_or(0);
            if min_val.saturating_add(step) >= max_prec {
                break;
            }
            let mut next = Vec::with_capacity(coeffs.len());
            for j in 0..coeffs.len() {
                let mut acc = coeffs[j].clone();
                for k in 1..binoms.len().min(j + 1) {
                    let b = binoms[k];
                    if b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&coeffs[j - k].mul_monomial(b, k as i64 * step));
                }
                next.push(acc);
            }
            coeffs = next;
            qi *= q;
        }
        Ok(TSeries {
            field: self.field.clone(),
            coeffs,
        })
    }

    /// Coefficient-wise twist `F ↦ F^{(n)}`; coefficient `j` is capped at `profile.at(j)`
    /// when a profile is given (its lattice is the one the result is measured in).
    pub fn twist(&self, n: i64, profile: Option<Profile>) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| match profile {
                None => c.twist_with(n, EXACT, DEFAULT_LATTICE_CAP),
                Some(pr) => {
                    let cap = cap_for(c, n, pr, j);
                    c.twist_with(n, cap, DEFAULT_LATTICE_CAP)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TSeries {
            field: self.field.clone(),
            coeffs,
        })
    }

    /// Coefficient-wise twist with an explicit lattice cap.
    pub fn twist_capped(&self, n: i64, max_w: u32) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.twist_with(n, EXACT, max_w))
            .collect::<Result<Vec<_>>>()?;
        Ok(TSeries {
            field: self.field.clone(),
            coeffs,
        })
    }

    /// Lower bound on the `u`-valuation of `coeff_j · t^j`, scaled at lattice `w`.
    fn term_bound(&self, j: usize, w: u32) -> i64 {
        let c = &self.coeffs[j];
        let q = self.field.q() as i64;
        let lift = q.pow(w.saturating_sub(c.w()));
        let v = if c.w() > w {
            // coarsen: floor keeps it a lower bound
            c.val_bound().div_euclid(q.pow(c.w() - w))
        } else {
            c.val_bound().saturating_mul(lift)
        };
        v.saturating_sub((q - 1) * q.pow(w) * j as i64)
    }

    /// `Σ_j coeff_j · t^j` to absolute precision `n` (scaled at the finest lattice present).
    ///
    /// The omitted tail `j ≥ M` is certified by the last [`EVAL_WINDOW`] terms all
    /// lying at or above `n`; series built from `Ω` have coefficient valuations
    /// growing faster than `(q−1)j`, which makes the window a sound stopping test.
    pub fn eval_at_t(&self, n: i64) -> Result<TildeSeries> {
        let w = self.coeffs.iter().map(|c| c.w()).max().unwrap_or(0);
        let m = self.len();
        if m < EVAL_WINDOW {
            return Err(Error::NonConvergent(format!(
                "need at least {EVAL_WINDOW} T-coefficients, have {m}"
            )));
        }
        for j in m - EVAL_WINDOW..m {
            if self.term_bound(j, w) < n {
                return Err(Error::NonConvergent(format!(
                    "T^{j} term may reach u-exponent {} < {n}",
                    self.term_bound(j, w)
                )));
            }
        }
        self.eval_partial(n, w)
    }

    /// Evaluation at `T = t` when the caller has an independent tail bound.
    pub fn eval_partial(&self, n: i64, w: u32) -> Result<TildeSeries> {
        let mut acc = TildeSeries::zero(&self.field, w, n);
        for (j, c) in self.coeffs.iter().enumerate() {
            if self.term_bound(j, w) >= n {
                continue;
            }
            let term = c.lift(w.max(c.w())).mul(&TildeSeries::t_power(&self.field, j as i64, w.max(c.w())));
            if term.precision() < n {
                return Err(Error::InsufficientPrecision(format!(
                    "T^{j} term known to {} < {n}",
                    term.precision()
                )));
            }
            acc = acc.add(&term);
        }
        Ok(acc.truncate(n).normalize())
    }

    /// First index and exponent where two T-series differ below common precision.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, i64)> {
        let m = self.len().min(other.len());
        (0..m).find_map(|j| self.coeffs[j].first_difference(&other.coeffs[j]).map(|e| (j, e)))
    }

    /// Minimum coefficient precision, each measured at lattice `w` after subtracting
    /// `slope·j`: the profile base this series satisfies.
    pub fn profile_base(&self, profile_slope: i64, w: u32) -> i64 {
        let q = self.field.q() as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let p = if c.w() >= w {
                    c.precision().div_euclid(q.pow(c.w() - w))
                } else {
                    c.precision().saturating_mul(q.pow(w - c.w()))
                };
                p.saturating_sub(profile_slope * j as i64)
            })
            .min()
            .unwrap_or(EXACT)
    }
}

/// Trailing T-coefficients that must lie above the target for evaluation.
pub const EVAL_WINDOW: usize = 3;

fn truncate_at(c: &TildeSeries, profile: Profile, j: usize) -> TildeSeries {
    let q = c.field().q() as i64;
    let target = profile.at(j);
    if target >= EXACT {
        return c.clone();
    }
    if c.w() >= profile.w {
        c.truncate(target.saturating_mul(q.pow(c.w() - profile.w)))
    } else {
        // ceil(target / q^{Δ}) in the coarser lattice keeps at least `target`
        let k = q.pow(profile.w - c.w());
        c.truncate(-((-target).div_euclid(k)))
    }
}

/// Cap, in the lattice of the twisted coefficient, corresponding to `profile.at(j)`.
fn cap_for(c: &TildeSeries, n: i64, profile: Profile, j: usize) -> i64 {
    let target = profile.at(j);
    if target >= EXACT {
        return EXACT;
    }
    let q = c.field().q() as i64;
    let w_after = (c.w() as i64 - n).max(0) as u32;
    if w_after >= profile.w {
        target.saturating_mul(q.pow(w_after - profile.w))
    } else {
        let k = q.pow(profile.w - w_after);
        -((-target).div_euclid(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field_context;

    #[test]
    fn eval_of_t_minus_theta_is_zero() {
        let f = make_field_context(3, 1).unwrap();
        let mut x = TSeries::t_minus_theta(&f, 5);
        x = x.truncate(Profile::for_eval(&f, 0, 50));
        let v = x.eval_at_t(50).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn nonconvergent_is_reported() {
        let f = make_field_context(2, 1).unwrap();
        let coeffs = (0..6).map(|_| TildeSeries::one(&f)).collect();
        let x = TSeries::from_coeffs(&f, coeffs, 6);
        assert!(matches!(x.eval_at_t(10), Err(Error::NonConvergent(_))));
    }
}
