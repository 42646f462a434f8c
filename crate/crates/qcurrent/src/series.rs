//! Truncated multivariate Laurent/Taylor series with exact coefficients.
//!
//! A [`SeriesContext`] declares the truncation window: the h-adic order `K`
//! (terms carry `h^a` with `0 <= a < K`), plus for every named variable
//! either a Taylor range `0..=max` or a Laurent range `low..=high`.  A
//! [`TruncSeries`] is a sparse map from exponent vectors to scalars; every
//! operation clips its result to the window.
//!
//! Negative powers of a sum are expanded with an explicit leading variable:
//! `(x + t1 + ... + tk)^(-m)` becomes a series in negative powers of `x`
//! and nonnegative powers of the remaining terms.  Which variable leads is
//! part of the meaning of each identity checked downstream, so it is always
//! spelled out by the caller through a [`LinearForm`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::scalar::{binomial, Scalar};

/// Exponent vector: position 0 is the power of `h`, positions `1..` follow
/// the context's variable order.
pub type Expo = SmallVec<[i16; 8]>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKind {
    Taylor { max: i16 },
    Laurent { low: i16, high: i16 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSpec {
    pub name: String,
    pub kind: VarKind,
}

/// Truncation window shared by all series of one computation.
#[derive(Debug, PartialEq, Eq)]
pub struct SeriesContext {
    h_order: u32,
    vars: Vec<VarSpec>,
}

pub struct ContextBuilder {
    h_order: u32,
    vars: Vec<VarSpec>,
}

impl SeriesContext {
    pub fn builder(h_order: u32) -> ContextBuilder {
        assert!(h_order >= 1, "h-order must be at least 1");
        ContextBuilder { h_order, vars: Vec::new() }
    }

    pub fn h_order(&self) -> u32 {
        self.h_order
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn width(&self) -> usize {
        1 + self.vars.len()
    }

    /// Index of a variable by name.  Panics on unknown names: variable sets
    /// are fixed per computation, so a miss is a programming error.
    pub fn var(&self, name: &str) -> usize {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .unwrap_or_else(|| panic!("unknown variable `{name}`"))
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v.name == name)
    }

    pub fn var_name(&self, idx: usize) -> &str {
        &self.vars[idx].name
    }

    pub fn laurent_low(&self, idx: usize) -> i16 {
        match self.vars[idx].kind {
            VarKind::Laurent { low, .. } => low,
            VarKind::Taylor { .. } => 0,
        }
    }

    pub fn in_window(&self, e: &Expo) -> bool {
        debug_assert_eq!(e.len(), self.width());
        if e[0] < 0 || e[0] as u32 >= self.h_order {
            return false;
        }
        for (i, spec) in self.vars.iter().enumerate() {
            let x = e[1 + i];
            match spec.kind {
                VarKind::Taylor { max } => {
                    if x < 0 || x > max {
                        return false;
                    }
                }
                VarKind::Laurent { low, high } => {
                    if x < low || x > high {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn zero_expo(&self) -> Expo {
        smallvec![0; self.width()]
    }

    /// Renders an exponent vector as `h^a ; u^-1 v^2` (zero variable
    /// exponents omitted, the h power always shown).
    pub fn monomial_string(&self, e: &Expo) -> String {
        let mut s = format!("h^{}", e[0]);
        let mut vars = String::new();
        for (i, spec) in self.vars.iter().enumerate() {
            if e[1 + i] != 0 {
                if !vars.is_empty() {
                    vars.push(' ');
                }
                vars.push_str(&format!("{}^{}", spec.name, e[1 + i]));
            }
        }
        if !vars.is_empty() {
            s.push_str(" ; ");
            s.push_str(&vars);
        }
        s
    }
}

impl ContextBuilder {
    pub fn taylor(mut self, name: &str, max: i16) -> Self {
        assert!(max >= 0);
        self.push(name, VarKind::Taylor { max });
        self
    }

    pub fn laurent(mut self, name: &str, low: i16, high: i16) -> Self {
        assert!(low <= 0 && high >= 0, "laurent window must contain 0");
        self.push(name, VarKind::Laurent { low, high });
        self
    }

    fn push(&mut self, name: &str, kind: VarKind) {
        assert!(
            name != "h" && self.vars.iter().all(|v| v.name != name),
            "duplicate variable `{name}`"
        );
        self.vars.push(VarSpec { name: name.to_string(), kind });
    }

    pub fn build(self) -> Arc<SeriesContext> {
        Arc::new(SeriesContext { h_order: self.h_order, vars: self.vars })
    }
}

/// One summand of a linear form: `h`, the constant `1`, or a context
/// variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    H,
    One,
    Var(usize),
}

/// Linear combination `c1*x1 + c2*x2 + ...` of variables and `h`, used as
/// the argument of shifts and of negative-power expansions.  The first
/// summand is the leading term: negative powers are expanded into negative
/// powers of it and nonnegative powers of the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm<S> {
    terms: Vec<(Atom, S)>,
}

impl<S: Scalar> LinearForm<S> {
    pub fn var(ctx: &SeriesContext, name: &str) -> Self {
        LinearForm { terms: vec![(Atom::Var(ctx.var(name)), S::one())] }
    }

    pub fn neg_var(ctx: &SeriesContext, name: &str) -> Self {
        LinearForm { terms: vec![(Atom::Var(ctx.var(name)), -S::one())] }
    }

    pub fn plus(mut self, ctx: &SeriesContext, name: &str) -> Self {
        self.terms.push((Atom::Var(ctx.var(name)), S::one()));
        self
    }

    pub fn minus(mut self, ctx: &SeriesContext, name: &str) -> Self {
        self.terms.push((Atom::Var(ctx.var(name)), -S::one()));
        self
    }

    /// Adds `c * h`.
    pub fn plus_h(mut self, c: S) -> Self {
        if !c.is_zero() {
            self.terms.push((Atom::H, c));
        }
        self
    }

    /// Adds the constant `c`.
    pub fn plus_const(mut self, c: S) -> Self {
        if !c.is_zero() {
            self.terms.push((Atom::One, c));
        }
        self
    }

    /// The form with every coefficient negated (same leading variable).
    pub fn negated(&self) -> Self {
        LinearForm {
            terms: self.terms.iter().map(|(a, c)| (*a, -c.clone())).collect(),
        }
    }

    pub fn leading(&self) -> (Atom, &S) {
        let (a, c) = &self.terms[0];
        (*a, c)
    }

    /// The form as a degree-one polynomial series.
    pub fn to_series(&self, ctx: &Arc<SeriesContext>) -> TruncSeries<S> {
        let mut out = TruncSeries::zero(ctx);
        for (atom, c) in &self.terms {
            let mut e = ctx.zero_expo();
            match atom {
                Atom::H => e[0] = 1,
                Atom::One => {}
                Atom::Var(i) => e[1 + i] = 1,
            }
            out.push(e, c.clone());
        }
        out
    }
}

/// Sparse truncated series.
#[derive(Debug, Clone)]
pub struct TruncSeries<S> {
    ctx: Arc<SeriesContext>,
    terms: BTreeMap<Expo, S>,
}

impl<S: Scalar> TruncSeries<S> {
    pub fn zero(ctx: &Arc<SeriesContext>) -> Self {
        TruncSeries { ctx: Arc::clone(ctx), terms: BTreeMap::new() }
    }

    pub fn one(ctx: &Arc<SeriesContext>) -> Self {
        Self::constant(ctx, S::one())
    }

    pub fn constant(ctx: &Arc<SeriesContext>, c: S) -> Self {
        let mut s = Self::zero(ctx);
        s.push(ctx.zero_expo(), c);
        s
    }

    /// Single monomial `c * h^h_exp * prod vars[i]^var_exps[i]`; clips to the
    /// window like every other constructor.
    pub fn monomial(ctx: &Arc<SeriesContext>, h_exp: i16, var_exps: &[i16], c: S) -> Self {
        assert_eq!(var_exps.len(), ctx.vars.len(), "wrong exponent count");
        let mut e = ctx.zero_expo();
        e[0] = h_exp;
        e[1..].copy_from_slice(var_exps);
        let mut s = Self::zero(ctx);
        s.push(e, c);
        s
    }

    pub fn ctx(&self) -> &Arc<SeriesContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn same_ctx(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx,
            "series from different contexts"
        );
    }

    /// Adds `c` at exponent `e`, dropping the entry when it cancels and
    /// ignoring anything outside the window.
    pub fn push(&mut self, e: Expo, c: S) {
        if c.is_zero() || !self.ctx.in_window(&e) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(e.clone(), c.clone());
        }
        out
    }

    pub fn acc(&mut self, other: &Self) {
        self.same_ctx(other);
        for (e, c) in &other.terms {
            self.push(e.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TruncSeries {
            ctx: Arc::clone(&self.ctx),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        TruncSeries {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), x.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let mut out = Self::zero(&self.ctx);
        // Iterate the smaller operand outside for fewer window probes.
        let (a, b) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let mut e = ea.clone();
                for (x, y) in e.iter_mut().zip(eb.iter()) {
                    *x += *y;
                }
                if out.ctx.in_window(&e) {
                    out.push(e, ca.clone() * cb.clone());
                }
            }
        }
        out
    }

    /// Multiplies by a polynomial in `h` given by its coefficient vector
    /// (index = h-power), clipping at the h-order.
    pub fn mul_hpoly(&self, p: &[S]) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (k, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (e, a) in &self.terms {
                let mut e = e.clone();
                e[0] += k as i16;
                out.push(e, a.clone() * c.clone());
            }
        }
        out
    }

    /// Multiplies by `h^k` (k >= 0), clipping at the h-order.
    pub fn mul_h(&self, k: i16) -> Self {
        assert!(k >= 0);
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[0] += k;
            out.push(e, c.clone());
        }
        out
    }

    /// Exact division by `h^k`: every term must carry at least `h^k`.
    ///
    /// Knowledge of the result is one h-order shorter than the input's
    /// context advertises; callers reserve headroom for that.
    pub fn div_h_exact(&self, k: i16) -> Result<Self> {
        assert!(k >= 0);
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            if e[0] < k {
                return Err(Error::InexactDivision(format!(
                    "term {} not divisible by h^{k}",
                    self.ctx.monomial_string(e)
                )));
            }
            let mut e = e.clone();
            e[0] -= k;
            out.push(e, c.clone());
        }
        Ok(out)
    }

    /// Minimal power of `h` among the terms.
    pub fn h_valuation(&self) -> Option<i16> {
        self.terms.keys().map(|e| e[0]).min()
    }

    /// Drops all terms with h-power `>= k`.
    pub fn truncate_h(&self, k: u32) -> Self {
        TruncSeries {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| (e[0] as u32) < k)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient of `var^exp` as a series in the remaining variables
    /// (the extracted variable's exponent is zeroed).
    pub fn coeff_var(&self, var: usize, exp: i16) -> Self {
        let pos = 1 + var;
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            if e[pos] == exp {
                let mut e = e.clone();
                e[pos] = 0;
                out.push(e, c.clone());
            }
        }
        out
    }

    /// Coefficient of `h^k`, exponent zeroed.
    pub fn coeff_h(&self, k: i16) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            if e[0] == k {
                let mut e = e.clone();
                e[0] = 0;
                out.push(e, c.clone());
            }
        }
        out
    }

    /// The scalar coefficient at one exact exponent vector.
    pub fn coeff_at(&self, e: &Expo) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    /// Keeps only terms satisfying the predicate.
    pub fn restrict(&self, pred: impl Fn(&Expo) -> bool) -> Self {
        TruncSeries {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| pred(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Formal derivative in the given variable.  The image of the window's
    /// lowest Laurent exponent falls outside the window and is dropped, so
    /// comparisons involving derivatives must shrink the window accordingly.
    pub fn derivative(&self, var: usize) -> Self {
        let pos = 1 + var;
        let mut out = Self::zero(&self.ctx);
        for (e, c) in &self.terms {
            if e[pos] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[pos] -= 1;
            out.push(e2, c.clone() * S::from_int(e[pos] as i64));
        }
        out
    }

    /// `(form)^power`, expanded in the window.  Nonnegative powers are plain
    /// polynomial powers.  Negative powers require the form's leading term
    /// to be a Laurent variable with coefficient +1 or -1.
    pub fn linear_power(
        ctx: &Arc<SeriesContext>,
        form: &LinearForm<S>,
        power: i32,
    ) -> Result<Self> {
        if power >= 0 {
            let base = form.to_series(ctx);
            let mut out = Self::one(ctx);
            for _ in 0..power {
                out = out.mul(&base);
                if out.is_zero() {
                    break;
                }
            }
            return Ok(out);
        }

        let k = -power;
        let (atom, lead_coeff) = form.leading();
        let lead_var = match atom {
            Atom::Var(v) => v,
            Atom::H => return Err(Error::BadLeading("h".into())),
            Atom::One => return Err(Error::BadLeading("constant".into())),
        };
        let low = match ctx.vars[lead_var].kind {
            VarKind::Laurent { low, .. } => low,
            VarKind::Taylor { .. } => {
                return Err(Error::BadLeading(format!(
                    "taylor variable `{}`",
                    ctx.var_name(lead_var)
                )));
            }
        };
        let sign = if *lead_coeff == S::one() {
            S::one()
        } else if *lead_coeff == -S::one() {
            -S::one()
        } else {
            return Err(Error::BadLeading(format!(
                "leading coefficient {lead_coeff} (want +1 or -1)"
            )));
        };

        // form = sign*x + T, so form^(-k) = sign^k * (x + sign*T)^(-k)
        //      = sign^k * sum_j C(-k, j) (sign*T)^j x^(-k-j).
        let mut tail = Self::zero(ctx);
        for (atom, c) in form.terms.iter().skip(1) {
            let mut e = ctx.zero_expo();
            match atom {
                Atom::H => e[0] = 1,
                Atom::One => {}
                Atom::Var(i) => {
                    assert!(*i != lead_var, "leading variable repeated in tail");
                    e[1 + i] = 1;
                }
            }
            tail.push(e, c.clone() * sign.clone());
        }

        let sign_k = if k % 2 == 0 { S::one() } else { sign };
        let mut out = Self::zero(ctx);
        let mut tail_pow = Self::one(ctx);
        let mut j: i32 = 0;
        loop {
            let x_exp = -k - j;
            if x_exp < low as i32 {
                break;
            }
            if tail_pow.is_zero() {
                break;
            }
            let coeff = binomial::<S>(-k as i64, j as u32) * sign_k.clone();
            if !coeff.is_zero() {
                for (e, c) in &tail_pow.terms {
                    let mut e = e.clone();
                    e[1 + lead_var] += x_exp as i16;
                    out.push(e, c.clone() * coeff.clone());
                }
            }
            tail_pow = tail_pow.mul(&tail);
            j += 1;
        }
        Ok(out)
    }

    /// Substitutes a linear form for one variable, leaving every other
    /// variable in place (matched by name in the target context).
    pub fn substitute_shift(
        &self,
        var: usize,
        form: &LinearForm<S>,
        target: &Arc<SeriesContext>,
    ) -> Result<Self> {
        let forms: Vec<LinearForm<S>> = (0..self.ctx.vars.len())
            .map(|i| {
                if i == var {
                    form.clone()
                } else {
                    LinearForm::var(target, self.ctx.var_name(i))
                }
            })
            .collect();
        self.substitute_all(&forms, target)
    }

    /// Substitutes a linear form for every variable simultaneously.
    /// `forms[i]` is the image of source variable `i` in the target context.
    pub fn substitute_all(
        &self,
        forms: &[LinearForm<S>],
        target: &Arc<SeriesContext>,
    ) -> Result<Self> {
        assert_eq!(forms.len(), self.ctx.vars.len());
        let mut powers: HashMap<(usize, i16), TruncSeries<S>> = HashMap::new();
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut term = Self::monomial(target, e[0], &vec![0; target.vars.len()], c.clone());
            for (i, form) in forms.iter().enumerate() {
                let exp = e[1 + i];
                if exp == 0 {
                    continue;
                }
                let key = (i, exp);
                if !powers.contains_key(&key) {
                    let p = Self::linear_power(target, form, exp as i32)?;
                    powers.insert(key, p);
                }
                term = term.mul(&powers[&key]);
                if term.is_zero() {
                    break;
                }
            }
            out.acc(&term);
        }
        Ok(out)
    }

    /// First exponent at which the two series disagree, with both values.
    pub fn first_difference(&self, other: &Self) -> Option<(Expo, S, S)> {
        self.same_ctx(other);
        let mut keys: Vec<&Expo> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        for e in keys {
            let a = self.coeff_at(e);
            let b = other.coeff_at(e);
            if a != b {
                return Some((e.clone(), a, b));
            }
        }
        None
    }
}

impl<S: Scalar> PartialEq for TruncSeries<S> {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.terms == other.terms
    }
}

impl<S: Scalar> fmt::Display for TruncSeries<S> {
    /// Canonical text form: one term per line,
    /// `coeff num/den ; h^a ; var^e ...`, in exponent-vector order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "{} ; {}", c.fmt_ratio(), self.ctx.monomial_string(e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    type S = TruncSeries<Rat>;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from_ratio(n, d)
    }

    fn ctx_zu() -> Arc<SeriesContext> {
        SeriesContext::builder(3).laurent("z", -4, 2).taylor("u", 2).build()
    }

    #[test]
    fn golden_inverse_of_z_plus_u() {
        // (z + u)^-1 = z^-1 - u z^-2 + u^2 z^-3 - ...
        let ctx = ctx_zu();
        let form = LinearForm::var(&ctx, "z").plus(&ctx, "u");
        let got = S::linear_power(&ctx, &form, -1).unwrap();
        let mut want = S::zero(&ctx);
        want.acc(&S::monomial(&ctx, 0, &[-1, 0], rat(1, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-2, 1], rat(-1, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-3, 2], rat(1, 1)));
        assert_eq!(got, want);
    }

    #[test]
    fn inverse_times_form_is_one() {
        // The u-window clips the boundary residue, so the product is exactly 1.
        let ctx = ctx_zu();
        let form = LinearForm::var(&ctx, "z").plus(&ctx, "u");
        let inv = S::linear_power(&ctx, &form, -1).unwrap();
        let prod = inv.mul(&form.to_series(&ctx));
        assert_eq!(prod, S::one(&ctx));
    }

    #[test]
    fn inverse_square_with_negative_tail() {
        // (u - v)^-2 = u^-2 + 2 v u^-3 + 3 v^2 u^-4 + ...
        let ctx = SeriesContext::builder(2).laurent("u", -5, 1).taylor("v", 2).build();
        let form = LinearForm::var(&ctx, "u").minus(&ctx, "v");
        let got = S::linear_power(&ctx, &form, -2).unwrap();
        let mut want = S::zero(&ctx);
        want.acc(&S::monomial(&ctx, 0, &[-2, 0], rat(1, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-3, 1], rat(2, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-4, 2], rat(3, 1)));
        assert_eq!(got, want);
    }

    #[test]
    fn negative_leading_sign() {
        // (-v + u)^-1 = -(v - u)^-1 = -sum_j u^j v^(-1-j), leading v.
        let ctx = SeriesContext::builder(2).laurent("v", -4, 1).taylor("u", 2).build();
        let form = LinearForm::neg_var(&ctx, "v").plus(&ctx, "u");
        let got = S::linear_power(&ctx, &form, -1).unwrap();
        let mut want = S::zero(&ctx);
        want.acc(&S::monomial(&ctx, 0, &[-1, 0], rat(-1, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-2, 1], rat(-1, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-3, 2], rat(-1, 1)));
        assert_eq!(got, want);
        // Sanity: multiplying back gives 1 (u-window kills the residue).
        assert_eq!(got.mul(&form.to_series(&ctx)), S::one(&ctx));
    }

    #[test]
    fn hand_convolution() {
        // (z^-1 - u z^-2) * z = 1 - u z^-1.
        let ctx = ctx_zu();
        let mut a = S::zero(&ctx);
        a.acc(&S::monomial(&ctx, 0, &[-1, 0], rat(1, 1)));
        a.acc(&S::monomial(&ctx, 0, &[-2, 1], rat(-1, 1)));
        let z = S::monomial(&ctx, 0, &[1, 0], rat(1, 1));
        let got = a.mul(&z);
        let mut want = S::one(&ctx);
        want.acc(&S::monomial(&ctx, 0, &[-1, 1], rat(-1, 1)));
        assert_eq!(got, want);
    }

    #[test]
    fn substitute_shift_matches_expansion() {
        // z^-1 with z -> z + u equals the direct expansion of (z+u)^-1.
        let ctx_src = SeriesContext::builder(3).laurent("z", -4, 2).build();
        let ctx_dst = ctx_zu();
        let zinv = S::monomial(&ctx_src, 0, &[-1], rat(1, 1));
        let form = LinearForm::var(&ctx_dst, "z").plus(&ctx_dst, "u");
        let got = zinv.substitute_shift(0, &form, &ctx_dst).unwrap();
        let want = S::linear_power(&ctx_dst, &form, -1).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn consecutive_h_shift_substitution() {
        // u^-1 with u -> u - h: u^-1 + h u^-2 + h^2 u^-3.
        let ctx = SeriesContext::builder(3).laurent("u", -4, 1).build();
        let uinv = S::monomial(&ctx, 0, &[-1], rat(1, 1));
        let form = LinearForm::var(&ctx, "u").plus_h(rat(-1, 1));
        let got = uinv.substitute_shift(0, &form, &ctx).unwrap();
        let mut want = S::zero(&ctx);
        want.acc(&S::monomial(&ctx, 0, &[-1], rat(1, 1)));
        want.acc(&S::monomial(&ctx, 1, &[-2], rat(1, 1)));
        want.acc(&S::monomial(&ctx, 2, &[-3], rat(1, 1)));
        assert_eq!(got, want);
    }

    #[test]
    fn constant_tail_expansion() {
        // (u + 2)^-1 = u^-1 - 2 u^-2 + 4 u^-3 - ...
        let ctx = SeriesContext::builder(2).laurent("u", -3, 1).build();
        let form = LinearForm::var(&ctx, "u").plus_const(rat(2, 1));
        let got = S::linear_power(&ctx, &form, -1).unwrap();
        let mut want = S::zero(&ctx);
        want.acc(&S::monomial(&ctx, 0, &[-1], rat(1, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-2], rat(-2, 1)));
        want.acc(&S::monomial(&ctx, 0, &[-3], rat(4, 1)));
        assert_eq!(got, want);
    }

    #[test]
    fn h_division_is_exact_or_fails() {
        let ctx = ctx_zu();
        let a = S::monomial(&ctx, 2, &[-1, 1], rat(3, 4));
        assert_eq!(a.div_h_exact(2).unwrap(), S::monomial(&ctx, 0, &[-1, 1], rat(3, 4)));
        let b = S::one(&ctx);
        assert!(b.div_h_exact(1).is_err());
    }

    #[test]
    fn ring_identities_on_fixed_series() {
        let ctx = ctx_zu();
        let a = S::monomial(&ctx, 0, &[-1, 1], rat(2, 3)).add(&S::one(&ctx));
        let b = S::monomial(&ctx, 1, &[1, 0], rat(-5, 2)).add(&S::monomial(
            &ctx,
            0,
            &[0, 1],
            rat(1, 7),
        ));
        let c = S::monomial(&ctx, 0, &[-2, 0], rat(4, 1));
        assert_eq!(a.mul(&b), b.mul(&a));
        assert_eq!(a.mul(&b.mul(&c)), a.mul(&b).mul(&c));
        assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        assert_eq!(a.sub(&a), S::zero(&ctx));
    }

    #[test]
    fn derivative_and_coeff() {
        let ctx = ctx_zu();
        // d/dz (z^2 u) = 2 z u
        let a = S::monomial(&ctx, 0, &[2, 1], rat(1, 1));
        assert_eq!(a.derivative(0), S::monomial(&ctx, 0, &[1, 1], rat(2, 1)));
        let b = a.add(&S::monomial(&ctx, 1, &[2, 0], rat(7, 1)));
        let esz = b.coeff_var(0, 2);
        let mut want = S::monomial(&ctx, 0, &[0, 1], rat(1, 1));
        want.acc(&S::monomial(&ctx, 1, &[0, 0], rat(7, 1)));
        assert_eq!(esz, want);
    }

    #[test]
    fn display_canonical_format() {
        let ctx = ctx_zu();
        let mut a = S::monomial(&ctx, 1, &[-1, 2], rat(3, 4));
        a.acc(&S::constant(&ctx, rat(-1, 2)));
        let text = a.to_string();
        assert_eq!(text, "-1/2 ; h^0\n3/4 ; h^1 ; z^-1 u^2");
    }

    #[test]
    fn window_clipping_silent() {
        let ctx = ctx_zu();
        // h^5 is beyond K=3: constructor yields zero.
        assert!(S::monomial(&ctx, 5, &[0, 0], rat(1, 1)).is_zero());
        // z^-9 is below the laurent floor.
        assert!(S::monomial(&ctx, 0, &[-9, 0], rat(1, 1)).is_zero());
    }
}
