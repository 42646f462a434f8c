//! Vertex-operator structure on the vacuum module.
//!
//! The vacuum module carries a state-field correspondence: a state built
//! from creation modes is sent to the operator-valued series obtained by
//! attaching a spectral shift `z` to every creation family and normalizing
//! away the leading powers of `h`.  This module constructs that map, the
//! translation operator `D` generated by the shift, and the braiding map
//! `S(z)` on pairs of states, and verifies the axioms they satisfy.
//!
//! # Conventions
//!
//! * **Basis.**  States are spanned by normally ordered creator words
//!   (ascending generator order).  Creation families are triangular over
//!   this basis: the coefficient family of an `n`-leg creation product at
//!   modes `(a_1..a_n)` and entries `(i_l, j_l)` equals
//!   `prod_l (delta-part - h t(-a_l)[i_l,j_l])`, so a basis word is
//!   recovered from family values by subtracting delta-dropped subwords
//!   and dividing by `(-h)^n`.  Every such division is performed exactly
//!   and certified at runtime ([`TruncSeries::div_h_exact`]).
//! * **h-window bookkeeping.**  A computation that divides by `h^d`
//!   along some path is run at internal order `K + d` and its result is
//!   only compared below `h^K`.  The internal order of each check is
//!   recorded in its report parameters.
//! * **Windows.**  Laurent windows in the spectral variables are part of
//!   each check's statement and are recorded in the report.  Coefficients
//!   inside the declared comparison band receive every contribution: the
//!   windows are padded by the searched multiplier exponent and by the
//!   raising reach of the creation caps.
//! * **Braiding table.**  `S(z)` is solved row by row from the linear
//!   system tying it to the flip of two independent creation families.
//!   The system is triangular modulo `h`, so a damped fixed-point sweep
//!   stabilizes after at most one sweep per kept `h`-order; the solved
//!   rows are then replayed through the defining system exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use crate::currents::{Caps, CurrentRep};
use crate::report::{CheckReport, Counterexample, RunConfig};
use crate::rmatrix::{build_r, RSpec};
use crate::scalar::Scalar;
use crate::series::{Expo, LinearForm, SeriesContext, TruncSeries};
use crate::tensor::{pack, unpack, Entry, Negate, Tensor};
use crate::yangian::{
    apply_t_inverse, apply_t_plus, prefixed, state_counterexample, vac_counterexample, vac_state,
    word_string, CGen, DualYangianRep, VacuumVector, Word,
};
use crate::{Error, Rat, Result};

// ---------------------------------------------------------------------------
// Pair states
// ---------------------------------------------------------------------------

/// A basis label of the two-fold tensor square of the vacuum module.
pub type Pair = (Word, Word);

/// Element of the tensor square of the vacuum module: a finite combination
/// of pairs of normally ordered creator words with series coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairVector<S: Scalar> {
    terms: BTreeMap<Pair, TruncSeries<S>>,
}

impl<S: Scalar> PairVector<S> {
    pub fn new() -> Self {
        PairVector { terms: BTreeMap::new() }
    }

    /// The vacuum pair `1 (x) 1`.
    pub fn one(ctx: &Arc<SeriesContext>) -> Self {
        let mut v = Self::new();
        v.push((Word::new(), Word::new()), TruncSeries::one(ctx));
        v
    }

    /// The basis pair with coefficient one.
    pub fn basis(ctx: &Arc<SeriesContext>, p: &Pair) -> Self {
        let mut v = Self::new();
        v.push(p.clone(), TruncSeries::one(ctx));
        v
    }

    pub fn push(&mut self, p: Pair, s: TruncSeries<S>) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&s);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Pair, &TruncSeries<S>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|s| s.is_zero())
    }

    pub fn acc(&mut self, other: &Self) {
        for (p, s) in &other.terms {
            self.push(p.clone(), s.clone());
        }
    }

    /// Swaps the two module slots of every pair.
    pub fn flip(&self) -> Self {
        let mut out = Self::new();
        for ((a, b), s) in &self.terms {
            out.push((b.clone(), a.clone()), s.clone());
        }
        out
    }

    /// Applies a map to every coefficient, dropping zero results.
    fn map_series(&self, f: impl Fn(&TruncSeries<S>) -> TruncSeries<S>) -> Self {
        let mut out = Self::new();
        for (p, s) in &self.terms {
            out.push(p.clone(), f(s));
        }
        out
    }
}

impl<S: Scalar> Entry<S> for PairVector<S> {
    fn add_assign_entry(&mut self, other: &Self) {
        self.acc(other);
    }

    fn mul_series(&self, s: &TruncSeries<S>) -> Self {
        self.map_series(|c| c.mul(s))
    }

    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }
}

impl<S: Scalar> Negate for PairVector<S> {
    fn negate(&self) -> Self {
        self.map_series(|c| c.neg())
    }
}

/// Renders a pair label for counterexample reports.
fn pair_string(p: &Pair) -> String {
    format!("{} (x) {}", label(&p.0), label(&p.1))
}

/// Renders a word, using `1` for the empty word.
fn label(w: &Word) -> String {
    if w.is_empty() {
        "1".to_string()
    } else {
        word_string(w)
    }
}

/// First coefficient where two pair vectors disagree, if any.
fn pair_counterexample<S: Scalar>(
    lhs: &PairVector<S>,
    rhs: &PairVector<S>,
) -> Option<Counterexample> {
    let mut keys: Vec<&Pair> = lhs.terms.keys().chain(rhs.terms.keys()).collect();
    keys.sort();
    keys.dedup();
    let zero = |p: &Pair, side: &PairVector<S>| {
        side.terms.get(p).cloned().unwrap_or_else(|| {
            TruncSeries::zero(side.terms.values().next().map(|s| s.ctx()).unwrap_or_else(|| {
                lhs.terms
                    .values()
                    .chain(rhs.terms.values())
                    .next()
                    .map(|s| s.ctx())
                    .expect("at least one side has a term")
            }))
        })
    };
    for p in keys {
        let a = zero(p, lhs);
        let b = zero(p, rhs);
        if let Some((e, ca, cb)) = a.first_difference(&b) {
            return Some(Counterexample {
                monomial: format!("{} : {}", pair_string(p), a.ctx().monomial_string(&e)),
                lhs: ca.fmt_ratio(),
                rhs: cb.fmt_ratio(),
            });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Context transfer
// ---------------------------------------------------------------------------

/// Moves a series into another context, matching variables by name.
///
/// Exponents of variables absent from the target must be zero (the series
/// must not actually depend on them); `h`-orders and window positions that
/// the target cannot hold are dropped, which callers use as intentional
/// truncation when landing in a smaller ambient context.
fn project_series<S: Scalar>(
    s: &TruncSeries<S>,
    target: &Arc<SeriesContext>,
) -> TruncSeries<S> {
    let src = s.ctx();
    let map: Vec<Option<usize>> = src
        .vars()
        .iter()
        .map(|v| if target.has_var(&v.name) { Some(target.var(&v.name)) } else { None })
        .collect();
    let mut out = TruncSeries::zero(target);
    for (e, c) in s.terms() {
        let mut te = target.zero_expo();
        te[0] = e[0];
        for (i, m) in map.iter().enumerate() {
            match m {
                Some(t) => te[1 + t] = e[1 + i],
                None => assert!(
                    e[1 + i] == 0,
                    "cannot project a series that depends on dropped variable {}",
                    src.var_name(i)
                ),
            }
        }
        out.push(te, c.clone());
    }
    out
}

/// Projects every coefficient of a module vector into another context.
fn vac_project<S: Scalar>(
    v: &VacuumVector<S>,
    target: &Arc<SeriesContext>,
) -> VacuumVector<S> {
    let mut out = VacuumVector::new();
    for (w, s) in v.terms() {
        out.push(w.clone(), project_series(s, target));
    }
    out
}

/// Projects every coefficient of a pair vector into another context.
fn pair_project<S: Scalar>(v: &PairVector<S>, target: &Arc<SeriesContext>) -> PairVector<S> {
    v.map_series(|s| project_series(s, target))
}

/// Extracts one variable exponent from every coefficient of a vector.
fn vac_coeff<S: Scalar>(v: &VacuumVector<S>, var: usize, exp: i16) -> VacuumVector<S> {
    let mut out = VacuumVector::new();
    for (w, s) in v.terms() {
        out.push(w.clone(), s.coeff_var(var, exp));
    }
    out
}

/// Restricts every coefficient of a vector to exponents satisfying `pred`.
fn vac_restrict<S: Scalar>(v: &VacuumVector<S>, pred: &dyn Fn(&Expo) -> bool) -> VacuumVector<S> {
    let mut out = VacuumVector::new();
    for (w, s) in v.terms() {
        out.push(w.clone(), s.restrict(pred));
    }
    out
}

/// The monomial `(-h)^p` in the given context.
fn neg_h_pow<S: Scalar>(ctx: &Arc<SeriesContext>, p: i16) -> TruncSeries<S> {
    let zeros = vec![0i16; ctx.vars().len()];
    let c = if p % 2 == 1 { -S::one() } else { S::one() };
    TruncSeries::monomial(ctx, p, &zeros, c)
}

/// Divides every coefficient by `(-h)^n` exactly.
fn vac_div_neg_h<S: Scalar>(v: &VacuumVector<S>, n: usize) -> Result<VacuumVector<S>> {
    let mut out = VacuumVector::new();
    for (w, s) in v.terms() {
        let d = s.div_h_exact(n as i16)?;
        out.push(w.clone(), if n % 2 == 1 { d.neg() } else { d });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Basis enumeration
// ---------------------------------------------------------------------------

/// All creator generators with modes `1..=modes`.
fn gens(dim: u32, modes: u32) -> Vec<CGen> {
    let mut out = Vec::new();
    for r in 1..=modes {
        for i in 0..dim {
            for j in 0..dim {
                out.push(CGen { r, i, j });
            }
        }
    }
    out
}

/// Normally ordered basis words of exactly the given degree.
fn basis_words(dim: u32, modes: u32, deg: u32) -> Vec<Word> {
    match deg {
        0 => vec![Word::new()],
        1 => gens(dim, modes).into_iter().map(|g| Word::from_slice(&[g])).collect(),
        2 => {
            let gs = gens(dim, modes);
            let mut out = Vec::new();
            for (a, g1) in gs.iter().enumerate() {
                for g2 in &gs[a..] {
                    out.push(Word::from_slice(&[*g1, *g2]));
                }
            }
            out
        }
        d => panic!("basis enumeration is implemented for degree <= 2, got {d}"),
    }
}

// ---------------------------------------------------------------------------
// The state-field correspondence
// ---------------------------------------------------------------------------

/// Lazily evaluated vertex map for one spectral argument and one target.
///
/// The `n`-leg creation family at spectral argument `zform` is computed
/// once per `n` and shared by every word extraction; word values are
/// memoized.  Each word of degree `n` consumes `n` orders of `h`-headroom
/// through the exact division by `(-h)^n`, so results are trusted below
/// `ctx.h_order() - n` (minus whatever the target already consumed).
struct YEngine<'a> {
    rep: &'a CurrentRep<Rat>,
    ctx: Arc<SeriesContext>,
    caps: Caps,
    zform: LinearForm<Rat>,
    target: VacuumVector<Rat>,
    fams: Vec<Option<Tensor<Rat, VacuumVector<Rat>>>>,
    memo: BTreeMap<Word, VacuumVector<Rat>>,
}

impl<'a> YEngine<'a> {
    fn new(
        rep: &'a CurrentRep<Rat>,
        ctx: &Arc<SeriesContext>,
        caps: Caps,
        zform: LinearForm<Rat>,
        target: VacuumVector<Rat>,
    ) -> Self {
        YEngine {
            rep,
            ctx: Arc::clone(ctx),
            caps,
            zform,
            target,
            fams: vec![None, None, None],
            memo: BTreeMap::new(),
        }
    }

    /// The `n`-leg composite-current family on the target state: lowering
    /// halves ascending at the half-shifted arguments, then raising halves
    /// descending, with spectral arguments `zform + y_l`.
    fn family(&mut self, n: usize) -> Result<Tensor<Rat, VacuumVector<Rat>>> {
        assert!(n <= 2, "creation families are implemented for degree <= 2");
        if let Some(f) = &self.fams[n] {
            return Ok(f.clone());
        }
        let dim = self.rep.dim();
        let half = self.rep.level().clone() * Rat::from_ratio(1, 2);
        let mut state = vac_state(&self.target, dim, n as u32);
        for leg in 0..n {
            let arg = self
                .zform
                .clone()
                .plus(&self.ctx, &format!("y{leg}"))
                .plus_h(half.clone());
            state = apply_t_inverse(
                self.rep.yangian(),
                &self.ctx,
                &state,
                leg as u32,
                &arg,
                self.caps.annihilator,
            )?;
        }
        for leg in (0..n).rev() {
            let arg = self.zform.clone().plus(&self.ctx, &format!("y{leg}"));
            state = apply_t_plus(
                self.rep.yangian(),
                &self.ctx,
                &state,
                leg as u32,
                &arg,
                self.caps.creator,
            );
        }
        self.fams[n] = Some(state.clone());
        Ok(state)
    }

    /// The vertex operator of a basis word applied to the target.
    fn word(&mut self, w: &Word) -> Result<VacuumVector<Rat>> {
        if w.is_empty() {
            return Ok(self.target.clone());
        }
        if let Some(v) = self.memo.get(w) {
            return Ok(v.clone());
        }
        let n = w.len();
        let fam = self.family(n)?;
        let dim = self.rep.dim();
        let rows: Vec<u32> = w.iter().map(|g| g.i).collect();
        let cols: Vec<u32> = w.iter().map(|g| g.j).collect();
        let mut num = fam
            .get(pack(&rows, dim), pack(&cols, dim))
            .cloned()
            .unwrap_or_else(VacuumVector::new);
        for (l, g) in w.iter().enumerate() {
            num = vac_coeff(&num, self.ctx.var(&format!("y{l}")), (g.r - 1) as i16);
        }
        // Subtract the delta-dropped subword contributions of the family.
        let droppable: Vec<usize> = w
            .iter()
            .enumerate()
            .filter(|(_, g)| g.r == 1 && g.i == g.j)
            .map(|(l, _)| l)
            .collect();
        for mask in 1u32..(1 << droppable.len()) {
            let dropped: Vec<usize> = droppable
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, l)| *l)
                .collect();
            let sub: Word =
                w.iter().enumerate().filter(|(l, _)| !dropped.contains(l)).map(|(_, g)| *g).collect();
            let sub_val = self.word(&sub)?;
            let p = (n - dropped.len()) as i16;
            num.acc(&sub_val.mul_series(&neg_h_pow(&self.ctx, p)).negate());
        }
        let out = vac_div_neg_h(&num, n)?;
        self.memo.insert(w.clone(), out.clone());
        Ok(out)
    }

    /// Linear extension of the vertex map to an arbitrary state.
    fn state(&mut self, v: &VacuumVector<Rat>) -> Result<VacuumVector<Rat>> {
        let items: Vec<(Word, TruncSeries<Rat>)> =
            v.terms().map(|(w, s)| (w.clone(), s.clone())).collect();
        let mut out = VacuumVector::new();
        for (w, s) in items {
            let val = self.word(&w)?;
            out.acc(&val.mul_series(&s));
        }
        Ok(out)
    }
}

/// The vertex operator `Y(state, zform)` applied to `target`.
///
/// `ctx` must contain Taylor or Laurent variables `y0`, `y1` covering the
/// modes of the words in `state` (exponent `r - 1` must be representable),
/// and enough `h`-headroom: a degree-`n` word consumes `n` orders.
pub fn vertex_y(
    rep: &CurrentRep<Rat>,
    ctx: &Arc<SeriesContext>,
    caps: Caps,
    state: &VacuumVector<Rat>,
    zform: &LinearForm<Rat>,
    target: &VacuumVector<Rat>,
) -> Result<VacuumVector<Rat>> {
    YEngine::new(rep, ctx, caps, zform.clone(), target.clone()).state(state)
}

// ---------------------------------------------------------------------------
// The translation operator
// ---------------------------------------------------------------------------

/// The translation operator `D` on the vacuum module.
///
/// `D` generates the spectral shift of creation families: the shifted
/// `n`-leg creation product applied to the vacuum is the exponential
/// `exp(z D)` of the unshifted family state.  Its value on a basis word is
/// therefore the `z^1` coefficient of the shifted family, triangularly
/// corrected by delta-dropped subwords and divided by `(-h)^n`.  On the
/// vacuum `D` vanishes, and on a single creator it raises the mode:
/// `D t(-a)[i,j] 1 = a t(-a-1)[i,j] 1`.
pub fn d_map(
    rep: &CurrentRep<Rat>,
    out_ctx: &Arc<SeriesContext>,
    v: &VacuumVector<Rat>,
) -> Result<VacuumVector<Rat>> {
    let dim = rep.dim();
    let deg_max = v.terms().map(|(w, _)| w.len()).max().unwrap_or(0);
    let mode_max = v.terms().flat_map(|(w, _)| w.iter().map(|g| g.r)).max().unwrap_or(1);
    assert!(deg_max <= 2, "the translation map is implemented for words of degree <= 2");
    // Internal context: enough h-headroom for the divisions, the shift
    // variable to first order, and extraction variables for the modes.
    let kw = out_ctx.h_order() + deg_max as u32;
    let mut b = SeriesContext::builder(kw).taylor("zs", 1);
    for l in 0..2 {
        b = b.taylor(&format!("y{l}"), mode_max as i16);
    }
    let ctx = b.build();
    let irep = DualYangianRep::new(dim, kw, rep.level().clone());
    let zvar = ctx.var("zs");
    let mut memo: BTreeMap<Word, VacuumVector<Rat>> = BTreeMap::new();
    let mut out = VacuumVector::new();
    for (w, c) in v.terms() {
        let val = d_word(&irep, &ctx, zvar, mode_max, w, &mut memo)?;
        out.acc(&vac_project(&val, out_ctx).mul_series(c));
    }
    Ok(out)
}

/// `D` on one basis word, through the shifted creation family on the
/// vacuum (the lowering halves act trivially there and are omitted).
fn d_word(
    rep: &DualYangianRep<Rat>,
    ctx: &Arc<SeriesContext>,
    zvar: usize,
    mode_max: u32,
    w: &Word,
    memo: &mut BTreeMap<Word, VacuumVector<Rat>>,
) -> Result<VacuumVector<Rat>> {
    if w.is_empty() {
        return Ok(VacuumVector::new());
    }
    if let Some(v) = memo.get(w) {
        return Ok(v.clone());
    }
    let dim = rep.dim();
    let n = w.len();
    let mut state = vac_state(&VacuumVector::one(ctx), dim, n as u32);
    for leg in (0..n).rev() {
        let arg = LinearForm::var(ctx, "zs").plus(ctx, &format!("y{leg}"));
        state = apply_t_plus(rep, ctx, &state, leg as u32, &arg, mode_max + 2);
    }
    let rows: Vec<u32> = w.iter().map(|g| g.i).collect();
    let cols: Vec<u32> = w.iter().map(|g| g.j).collect();
    let mut num = state
        .get(pack(&rows, dim), pack(&cols, dim))
        .cloned()
        .unwrap_or_else(VacuumVector::new);
    for (l, g) in w.iter().enumerate() {
        num = vac_coeff(&num, ctx.var(&format!("y{l}")), (g.r - 1) as i16);
    }
    num = vac_coeff(&num, zvar, 1);
    let droppable: Vec<usize> = w
        .iter()
        .enumerate()
        .filter(|(_, g)| g.r == 1 && g.i == g.j)
        .map(|(l, _)| l)
        .collect();
    for mask in 1u32..(1 << droppable.len()) {
        let dropped: Vec<usize> = droppable
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, l)| *l)
            .collect();
        let sub: Word =
            w.iter().enumerate().filter(|(l, _)| !dropped.contains(l)).map(|(_, g)| *g).collect();
        let sub_val = d_word(rep, ctx, zvar, mode_max, &sub, memo)?;
        let p = (n - dropped.len()) as i16;
        num.acc(&sub_val.mul_series(&neg_h_pow(ctx, p)).negate());
    }
    let out = vac_div_neg_h(&num, n)?;
    memo.insert(w.clone(), out.clone());
    Ok(out)
}

// ---------------------------------------------------------------------------
// The braiding table
// ---------------------------------------------------------------------------

/// One defining equation of the braiding map, indexed by a pair of
/// creation-family labels (a `None` slot is the bare vacuum factor).
#[derive(Debug, Clone)]
struct SEquation {
    /// Degree of the full pair word (number of `Some` slots).
    deg: usize,
    /// Right-hand side: the braided value the equation assigns.
    rhs: PairVector<Rat>,
    /// The two-slot family state the equation's argument expands to.
    fam: PairVector<Rat>,
    /// Correction between the flipped exchange image and the family state;
    /// vanishes modulo `h`, which makes the system solvable by iteration.
    mix: PairVector<Rat>,
}

/// The braiding map `S(z)` on the tensor square of the vacuum module,
/// solved on pairs of words with slot degree at most one.
///
/// Rows are produced on demand from the defining system: the image of a
/// two-slot creation family under the flipped exchange pipeline is sent by
/// `S(z)` to the family conjugated through the normalized exchange factors.
/// The table keeps its own `h`-order (two above the requested comparison
/// order, paying for the triangular divisions) and a symmetric Laurent
/// window in `z` wide enough for every `h`-graded tail it can hold.
pub struct SMapTable {
    /// Table context: the single Laurent variable `z`.
    ctx: Arc<SeriesContext>,
    /// Pipeline context: `z` plus extraction variables `xu`, `xv`.
    work: Arc<SeriesContext>,
    dim: u32,
    level: Rat,
    mode_cap: u32,
    rep: DualYangianRep<Rat>,
    eqs: BTreeMap<Pair, SEquation>,
    rows: BTreeMap<Pair, PairVector<Rat>>,
    /// Rows are in sync with the current equation set.
    solved: bool,
}

impl SMapTable {
    /// Builds an empty table.  `h_order` is the internal order (callers
    /// comparing below `h^K` should pass at least `K + 2`); `mode_cap`
    /// bounds the creator modes the basis may use.
    pub fn new(dim: u32, h_order: u32, level: Rat, mode_cap: u32) -> Self {
        let zlo = -((h_order as i16 - 1) + 2 * (mode_cap as i16 - 1) + 2);
        let ctx = SeriesContext::builder(h_order).laurent("z", zlo, -zlo).build();
        let work = SeriesContext::builder(h_order)
            .laurent("z", zlo, -zlo)
            .taylor("xu", mode_cap as i16 - 1)
            .taylor("xv", mode_cap as i16 - 1)
            .build();
        let rep = DualYangianRep::new(dim, h_order, level.clone());
        SMapTable {
            ctx,
            work,
            dim,
            level,
            mode_cap,
            rep,
            eqs: BTreeMap::new(),
            rows: BTreeMap::new(),
            solved: false,
        }
    }

    pub fn ctx(&self) -> &Arc<SeriesContext> {
        &self.ctx
    }

    /// The solved row for one basis pair.
    pub fn row(&mut self, p: &Pair) -> Result<PairVector<Rat>> {
        self.ensure(std::slice::from_ref(p))?;
        Ok(self.rows[p].clone())
    }

    /// Applies the braiding map to a pair vector given in the table context.
    pub fn apply(&mut self, x: &PairVector<Rat>) -> Result<PairVector<Rat>> {
        let pairs: Vec<Pair> = x.terms().map(|(p, _)| p.clone()).collect();
        self.ensure(&pairs)?;
        let mut out = PairVector::new();
        for (p, c) in x.terms() {
            out.acc(&self.rows[p].mul_series(c));
        }
        Ok(out)
    }

    /// Guarantees equations and converged rows for the given pairs (and
    /// everything they reference), then replays the defining system.
    pub fn ensure(&mut self, pairs: &[Pair]) -> Result<()> {
        let mut queue: Vec<Pair> = pairs.to_vec();
        let mut grew = false;
        while let Some(p) = queue.pop() {
            if self.eqs.contains_key(&p) {
                continue;
            }
            let eq = self.equation(&p)?;
            for (q, _) in eq.fam.terms().chain(eq.mix.terms()) {
                if !self.eqs.contains_key(q) {
                    queue.push(q.clone());
                }
            }
            self.eqs.insert(p, eq);
            grew = true;
        }
        if grew || !self.solved {
            self.resolve()?;
            self.replay()?;
            self.solved = true;
        }
        Ok(())
    }

    /// Checks that a pair is usable as a table basis label.
    fn admit(&self, p: &Pair) -> Result<(Option<CGen>, Option<CGen>)> {
        let slot = |w: &Word| -> Result<Option<CGen>> {
            match w.len() {
                0 => Ok(None),
                1 => {
                    let g = w[0];
                    if g.r > self.mode_cap {
                        Err(Error::BasisBound(format!(
                            "the braiding table needs creator mode {} beyond its bound {}; \
                             offending pair {}",
                            g.r,
                            self.mode_cap,
                            pair_string(p)
                        )))
                    } else {
                        Ok(Some(g))
                    }
                }
                d => Err(Error::BasisBound(format!(
                    "the braiding table is built on slot degree <= 1; offending pair {} \
                     has slot degree {d}",
                    pair_string(p)
                ))),
            }
        };
        Ok((slot(&p.0)?, slot(&p.1)?))
    }

    /// The two-slot family state of a pair label: the product of the
    /// per-slot coefficients `delta-part - h * creator`.
    fn family_state(&self, fu: &Option<CGen>, fv: &Option<CGen>) -> PairVector<Rat> {
        let slot = |g: &Option<CGen>| -> Vec<(Word, TruncSeries<Rat>)> {
            match g {
                None => vec![(Word::new(), TruncSeries::one(&self.ctx))],
                Some(g) => {
                    let mut terms =
                        vec![(Word::from_slice(&[*g]), neg_h_pow(&self.ctx, 1))];
                    if g.r == 1 && g.i == g.j {
                        terms.push((Word::new(), TruncSeries::one(&self.ctx)));
                    }
                    terms
                }
            }
        };
        let mut out = PairVector::new();
        for (wu, cu) in slot(fu) {
            for (wv, cv) in slot(fv) {
                out.push((wu.clone(), wv.clone()), cu.mul(&cv));
            }
        }
        out
    }

    /// Builds the defining equation for one pair label.
    fn equation(&self, p: &Pair) -> Result<SEquation> {
        let (fu, fv) = self.admit(p)?;
        let deg = fu.iter().count() + fv.iter().count();
        let fam = self.family_state(&fu, &fv);
        if fu.is_none() || fv.is_none() {
            // A bare vacuum slot braids trivially: the exchange factors
            // carry no matrix content on an empty family, so the map fixes
            // these directions exactly.
            return Ok(SEquation { deg, rhs: fam.clone(), fam, mix: PairVector::new() });
        }
        let (gu, gv) = (fu.unwrap(), fv.unwrap());
        let flipped = self.exchange_image(&gu, &gv)?.flip();
        let rhs = self.braided_value(&gu, &gv)?;
        let mut mix = flipped;
        mix.acc(&fam.negate());
        Ok(SEquation { deg, rhs, fam, mix })
    }

    /// The exchange image of a two-slot family: the second-slot creation
    /// family into the first slot and the first-slot family into the
    /// second, conjugated by the normalized exchange factors at the
    /// level-shifted arguments.
    fn exchange_image(&self, gu: &CGen, gv: &CGen) -> Result<PairVector<Rat>> {
        let ctx = &self.work;
        let arg = LinearForm::var(ctx, "z").plus(ctx, "xu").minus(ctx, "xv");
        let state = pair_identity(ctx, self.dim);
        let state = pair_t_plus(&self.rep, ctx, &state, 0, 1, &LinearForm::var(ctx, "xu"), self.mode_cap);
        let shifted = build_r(
            ctx,
            self.dim,
            &RSpec {
                arg: arg.clone().plus_h(-self.level.clone()),
                normalized: true,
                inverse: false,
            },
        )?;
        let state = shifted.compose(&state);
        let state = pair_t_plus(&self.rep, ctx, &state, 1, 0, &LinearForm::var(ctx, "xv"), self.mode_cap);
        let inv = build_r(ctx, self.dim, &RSpec { arg, normalized: true, inverse: true })?;
        let state = inv.compose(&state);
        self.extract(&state, gu, gv)
    }

    /// The braided right-hand side of the defining system for one family
    /// index: the first-slot family conjugated through the exchange factor
    /// and its level-shifted inverse around the second-slot family.
    fn braided_value(&self, gu: &CGen, gv: &CGen) -> Result<PairVector<Rat>> {
        let ctx = &self.work;
        let arg = LinearForm::var(ctx, "z").plus(ctx, "xu").minus(ctx, "xv");
        let fwd = build_r(ctx, self.dim, &RSpec { arg: arg.clone(), normalized: true, inverse: false })?;
        let state = fwd.compose(&pair_identity(ctx, self.dim));
        let state = pair_t_plus(&self.rep, ctx, &state, 1, 1, &LinearForm::var(ctx, "xv"), self.mode_cap);
        let inv = build_r(
            ctx,
            self.dim,
            &RSpec { arg: arg.clone().plus_h(self.level.clone()), normalized: true, inverse: true },
        )?;
        let state = inv.compose(&state);
        let state = pair_t_plus(&self.rep, ctx, &state, 0, 0, &LinearForm::var(ctx, "xu"), self.mode_cap);
        self.extract(&state, gu, gv)
    }

    /// Reads the family coefficient at the given generator labels out of a
    /// two-leg pipeline result and lands it in the table context.
    fn extract(
        &self,
        state: &Tensor<Rat, PairVector<Rat>>,
        gu: &CGen,
        gv: &CGen,
    ) -> Result<PairVector<Rat>> {
        let row = pack(&[gu.i, gv.i], self.dim);
        let col = pack(&[gu.j, gv.j], self.dim);
        let entry = match state.get(row, col) {
            Some(e) => e.clone(),
            None => PairVector::new(),
        };
        let xu = self.work.var("xu");
        let xv = self.work.var("xv");
        let picked = entry.map_series(|s| {
            s.coeff_var(xu, (gu.r - 1) as i16).coeff_var(xv, (gv.r - 1) as i16)
        });
        Ok(pair_project(&picked, &self.ctx))
    }

    /// Fixed-point sweeps over the equation set, in ascending degree, with
    /// lenient division while the iterate settles.  Stabilizes within one
    /// sweep per kept `h`-order because the sub-diagonal couplings all
    /// carry at least one power of `h`.
    fn resolve(&mut self) -> Result<()> {
        let mut order: Vec<Pair> = self.eqs.keys().cloned().collect();
        order.sort_by_key(|p| (self.eqs[p].deg, p.clone()));
        let sweeps = self.ctx.h_order() + 2;
        for _ in 0..=sweeps {
            let mut changed = false;
            for p in &order {
                let eq = &self.eqs[p];
                let mut num = eq.rhs.clone();
                for (q, c) in eq.fam.terms() {
                    if q != p {
                        if let Some(r) = self.rows.get(q) {
                            num.acc(&r.mul_series(c).negate());
                        }
                    }
                }
                for (q, c) in eq.mix.terms() {
                    if let Some(r) = self.rows.get(q) {
                        num.acc(&r.mul_series(c).negate());
                    }
                }
                let new_row = pair_div_neg_h_lenient(&num, eq.deg);
                if self.rows.get(p) != Some(&new_row) {
                    self.rows.insert(p.clone(), new_row);
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
        Err(Error::BasisBound(
            "the braiding solve did not stabilize within its h-order budget".into(),
        ))
    }

    /// Replays every defining equation through the converged rows with
    /// exact division, certifying that the fixed point solves the system.
    fn replay(&self) -> Result<()> {
        for (p, eq) in &self.eqs {
            let mut num = eq.rhs.clone();
            for (q, c) in eq.fam.terms() {
                if q != p {
                    num.acc(&self.row_ref(q)?.mul_series(c).negate());
                }
            }
            for (q, c) in eq.mix.terms() {
                num.acc(&self.row_ref(q)?.mul_series(c).negate());
            }
            let exact = pair_div_neg_h(&num, eq.deg)?;
            if &exact != &self.rows[p] {
                return Err(Error::BasisBound(format!(
                    "the braiding rows do not close the defining system at {}",
                    pair_string(p)
                )));
            }
        }
        Ok(())
    }

    fn row_ref(&self, q: &Pair) -> Result<&PairVector<Rat>> {
        self.rows.get(q).ok_or_else(|| {
            Error::BasisBound(format!(
                "the braiding table has no row for {}; the basis bound is too small",
                pair_string(q)
            ))
        })
    }

    /// Serializes the solved rows, one coefficient per line, for golden
    /// tests: `input ; output ; monomial ; coefficient`.
    pub fn to_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (p, row) in &self.rows {
            for (q, s) in row.terms() {
                for (e, c) in s.terms() {
                    out.push(format!(
                        "{} ; {} ; {} ; {}",
                        pair_string(p),
                        pair_string(q),
                        self.ctx.monomial_string(e),
                        c.fmt_ratio()
                    ));
                }
            }
        }
        out
    }
}

/// Divides a pair vector by `(-h)^n`, dropping coefficients below `h^n`
/// (used while the fixed point settles; the final pass divides exactly).
fn pair_div_neg_h_lenient(v: &PairVector<Rat>, n: usize) -> PairVector<Rat> {
    v.map_series(|s| {
        let kept = s.restrict(|e| e[0] >= n as i16);
        let d = kept.div_h_exact(n as i16).expect("restricted series divides exactly");
        if n % 2 == 1 {
            d.neg()
        } else {
            d
        }
    })
}

/// Divides a pair vector by `(-h)^n` exactly.
fn pair_div_neg_h(v: &PairVector<Rat>, n: usize) -> Result<PairVector<Rat>> {
    let mut out = PairVector::new();
    for (p, s) in v.terms() {
        let d = s.div_h_exact(n as i16)?;
        out.push(p.clone(), if n % 2 == 1 { d.neg() } else { d });
    }
    Ok(out)
}

/// The diagonal two-leg identity state over pair entries.
fn pair_identity(ctx: &Arc<SeriesContext>, dim: u32) -> Tensor<Rat, PairVector<Rat>> {
    let mut out = Tensor::zero(dim, 2);
    for x in 0..dim * dim {
        out.push(x, x, PairVector::one(ctx));
    }
    out
}

/// Applies a creation family on one matrix leg into one module slot:
/// `delta + sum_a (-h) arg^(a-1) * (mode-a creator)` acting entrywise.
fn pair_t_plus(
    rep: &DualYangianRep<Rat>,
    ctx: &Arc<SeriesContext>,
    state: &Tensor<Rat, PairVector<Rat>>,
    leg: u32,
    slot: usize,
    arg: &LinearForm<Rat>,
    mode_cap: u32,
) -> Tensor<Rat, PairVector<Rat>> {
    let dim = state.dim();
    let legs = state.legs();
    assert!(leg < legs);
    let mut out = state.clone();
    let base = arg.to_series(ctx);
    let mut pw = TruncSeries::one(ctx);
    for a in 1..=mode_cap {
        let coeff = pw.mul_h(1).neg();
        if coeff.is_zero() {
            break;
        }
        for ((row, col), pv) in state.entries() {
            let scaled = pv.mul_series(&coeff);
            if scaled.is_zero() {
                continue;
            }
            let digits = unpack(*row, dim, legs);
            let j = digits[leg as usize];
            for i in 0..dim {
                let acted = pair_act_creator(rep, slot, CGen { r: a, i, j }, &scaled);
                if acted.is_zero() {
                    continue;
                }
                let mut d2 = digits.clone();
                d2[leg as usize] = i;
                out.push(pack(&d2, dim), *col, acted);
            }
        }
        if a == mode_cap {
            break;
        }
        pw = pw.mul(&base);
        if pw.is_zero() {
            break;
        }
    }
    out
}

/// Acts with a creator on one slot of every pair.
fn pair_act_creator(
    rep: &DualYangianRep<Rat>,
    slot: usize,
    g: CGen,
    v: &PairVector<Rat>,
) -> PairVector<Rat> {
    let mut out = PairVector::new();
    for (p, s) in v.terms() {
        let mut tmp = VacuumVector::new();
        let word = if slot == 0 { p.0.clone() } else { p.1.clone() };
        tmp.push(word, s.clone());
        let acted = rep.act_creator(g, &tmp);
        for (w, c) in acted.terms() {
            let q = if slot == 0 { (w.clone(), p.1.clone()) } else { (p.0.clone(), w.clone()) };
            out.push(q, c.clone());
        }
    }
    out
}

/// Builds the braiding table sized by a run configuration: internal
/// `h`-order two above the requested one, modes up to `mode_bound`, and
/// rows pre-solved for every pair of slot words of degree at most one.
pub fn s_map_solve(cfg: &RunConfig) -> Result<SMapTable> {
    let level = first_level(cfg);
    let mut table = SMapTable::new(cfg.dim, cfg.h_order + 2, level, cfg.mode_bound + 3);
    let mut slots: Vec<Word> = vec![Word::new()];
    slots.extend(basis_words(cfg.dim, cfg.mode_bound, 1));
    let pairs: Vec<Pair> = slots
        .iter()
        .flat_map(|a| slots.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    table.ensure(&pairs)?;
    Ok(table)
}

/// The level the vertex structure runs at: the first configured value, or
/// zero (a generic, non-degenerate choice) when none is given.
fn first_level(cfg: &RunConfig) -> Rat {
    cfg.level
        .as_ref()
        .and_then(|v| v.first().cloned())
        .unwrap_or_else(|| Rat::from_int(0))
}

// ---------------------------------------------------------------------------
// Axiom checks
// ---------------------------------------------------------------------------

/// Substitutes the single table variable `z` by a form of the target
/// context in every coefficient of a row, with memoization.
fn substituted_row(
    table: &mut SMapTable,
    cache: &mut BTreeMap<Pair, PairVector<Rat>>,
    p: &Pair,
    form: &LinearForm<Rat>,
    target: &Arc<SeriesContext>,
) -> Result<PairVector<Rat>> {
    if let Some(r) = cache.get(p) {
        return Ok(r.clone());
    }
    let row = table.row(p)?;
    let mut out = PairVector::new();
    for (q, s) in row.terms() {
        out.push(q.clone(), s.substitute_all(std::slice::from_ref(form), target)?);
    }
    cache.insert(p.clone(), out.clone());
    Ok(out)
}

/// Applies the braiding map at a substituted argument to a pair vector
/// whose coefficients live in `target`.
fn apply_substituted(
    table: &mut SMapTable,
    cache: &mut BTreeMap<Pair, PairVector<Rat>>,
    x: &PairVector<Rat>,
    form: &LinearForm<Rat>,
    target: &Arc<SeriesContext>,
) -> Result<PairVector<Rat>> {
    let items: Vec<(Pair, TruncSeries<Rat>)> =
        x.terms().map(|(p, s)| (p.clone(), s.clone())).collect();
    let mut out = PairVector::new();
    for (p, s) in items {
        let row = substituted_row(table, cache, &p, form, target)?;
        out.acc(&row.mul_series(&s));
    }
    Ok(out)
}

/// The creation-to-field check: fields of basis states applied to the
/// vacuum have no negative spectral powers and recover the state at the
/// origin, and the field of the vacuum is the identity.
fn check_vacuum(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let m = cfg.mode_bound;
    let deg = cfg.pbw_degree;
    if deg > 2 {
        return Err(Error::InvalidConfig(format!(
            "creation-field checks are implemented for word degree <= 2; got {deg}"
        )));
    }
    let kw = k + deg;
    let b_cap = m + kw;
    let z_hi = 2 * (b_cap as i16 - 1) + 1;
    let ctx = SeriesContext::builder(kw)
        .laurent("z", -2, z_hi)
        .taylor("y0", m as i16 - 1)
        .taylor("y1", m as i16 - 1)
        .build();
    let caps = Caps { creator: b_cap, annihilator: 4 };
    let level = first_level(cfg);
    let rep = CurrentRep::new(dim, kw, level.clone());
    let mut params = cfg.params();
    params.insert(
        "window".into(),
        json!({"z": [-2, z_hi], "h_internal": kw, "creator_cap": b_cap, "level": level.fmt_ratio()}),
    );
    let zvar = ctx.var("z");
    let one = VacuumVector::one(&ctx);
    let mut engine = YEngine::new(&rep, &ctx, caps, LinearForm::var(&ctx, "z"), one.clone());
    let mut count = 0u32;
    for d in 1..=deg {
        for w in basis_words(dim, m, d) {
            let val = engine.word(&w)?;
            let trusted = vac_restrict(&val, &|e: &Expo| (e[0] as u32) < k);
            let negative = vac_restrict(&trusted, &|e: &Expo| e[1 + zvar] < 0);
            if !negative.is_zero() {
                let ce = vac_counterexample(&negative, &VacuumVector::new());
                return Ok(CheckReport::fail(
                    "vacuum",
                    params,
                    ce.map(|c| prefixed(c, &format!("state {}", label(&w)))),
                    "a field applied to the vacuum produced a negative spectral power",
                ));
            }
            let at_zero = vac_coeff(&trusted, zvar, 0);
            let expected = vac_restrict(
                &VacuumVector::basis(&ctx, &w),
                &|e: &Expo| (e[0] as u32) < k,
            );
            if let Some(ce) = vac_counterexample(&at_zero, &expected) {
                return Ok(CheckReport::fail(
                    "vacuum",
                    params,
                    Some(prefixed(ce, &format!("state {}", label(&w)))),
                    "the constant term of a field on the vacuum is not the state itself",
                ));
            }
            count += 1;
        }
    }
    // The field of the vacuum state is the identity: the zero-leg family
    // is empty, so this holds by construction; record it executed.
    let witness = engine.word(&Word::new())?;
    if vac_counterexample(&witness, &one).is_some() {
        return Ok(CheckReport::fail(
            "vacuum",
            params,
            None,
            "the field of the vacuum state failed to act as the identity",
        ));
    }
    Ok(CheckReport::pass(
        "vacuum",
        params,
        format!(
            "fields of all {count} basis words (degree <= {deg}, modes <= {m}) applied to the \
             vacuum are Taylor in z with constant term the state itself, and the vacuum field \
             is the identity"
        ),
    ))
}

/// Compares the exchange-conjugated two-current family with the plain
/// ordered product of single currents (for one leg the two constructions
/// coincide by definition; for two legs the conjugation is substantive).
fn check_qva1_vs_ekqva1(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let m = cfg.mode_bound;
    let n = cfg.n;
    if n == 0 || n > 2 {
        return Err(Error::InvalidConfig(format!(
            "the family comparison is implemented for one or two legs; got n = {n}"
        )));
    }
    if n == 2 && k > 2 {
        return Err(Error::InvalidConfig(format!(
            "the exchange-conjugated two-leg family uses window calculus sound only for \
             h_order <= 2; got h_order = {k}"
        )));
    }
    let zlo = -((3 * k + 3) as i16 + k as i16 + 2);
    let zhi = (k + m + 3) as i16;
    let ylo = -((3 * k + 3) as i16);
    let yhi = (m + k + 2) as i16;
    let mut b = SeriesContext::builder(k).laurent("z", zlo, zhi);
    for l in 0..n {
        b = b.laurent(&format!("y{l}"), ylo, yhi);
    }
    let ctx = b.build();
    let caps = Caps::shallow(k);
    let level = first_level(cfg);
    let rep = CurrentRep::new(dim, k, level.clone());
    let half = level.clone() * Rat::from_ratio(1, 2);
    let mut params = cfg.params();
    params.insert(
        "window".into(),
        json!({"z": [zlo, zhi], "y": [ylo, yhi], "level": level.fmt_ratio()}),
    );
    let band = (k + 1) as i16;
    let zvar = ctx.var("z");
    let yvars: Vec<usize> = (0..n).map(|l| ctx.var(&format!("y{l}"))).collect();
    let trust = move |e: &Expo| {
        (e[0] as u32) < k
            && e[1 + zvar].abs() <= band
            && yvars.iter().all(|y| e[1 + y] >= 0 && e[1 + y] <= m as i16 - 1)
    };
    let mut targets: Vec<(String, VacuumVector<Rat>)> =
        vec![("1".into(), VacuumVector::one(&ctx))];
    for w in basis_words(dim, m, 1) {
        targets.push((label(&w), VacuumVector::basis(&ctx, &w)));
    }
    for (name, target) in &targets {
        let state = vac_state(target, dim, n);
        let arg = |l: u32| LinearForm::var(&ctx, "z").plus(&ctx, &format!("y{l}"));
        let lhs = match n {
            1 => rep.apply_single(&ctx, &state, 0, &arg(0), caps)?,
            _ => {
                let rarg = LinearForm::var(&ctx, "y0").minus(&ctx, "y1");
                rep.apply_pair(&ctx, &state, (0, 1), (&arg(0), &arg(1)), &rarg, caps)?
            }
        };
        let mut rhs = state.clone();
        for leg in 0..n {
            rhs = apply_t_inverse(
                rep.yangian(),
                &ctx,
                &rhs,
                leg,
                &arg(leg).plus_h(half.clone()),
                caps.annihilator,
            )?;
        }
        for leg in (0..n).rev() {
            rhs = apply_t_plus(rep.yangian(), &ctx, &rhs, leg, &arg(leg), caps.creator);
        }
        if let Some(ce) = state_counterexample(&lhs, &rhs, &trust) {
            return Ok(CheckReport::fail(
                "qva1_vs_ekqva1",
                params,
                Some(prefixed(ce, &format!("target {name}"))),
                "the exchange-conjugated family and the plain ordered product disagree",
            ));
        }
    }
    let how = if n == 1 {
        "for one leg the two constructions share the same factors; the agreement is definitional"
    } else {
        "the two-leg exchange conjugation agrees with the plain ordered product"
    };
    Ok(CheckReport::pass(
        "qva1_vs_ekqva1",
        params,
        format!("{how} on the vacuum and every depth-one basis vector ({} targets)", targets.len()),
    ))
}

/// The shift compatibility of the braiding: commuting the translation
/// operator on the first slot past `S(z)` differentiates the table.
fn check_shift_s1(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let m = cfg.mode_bound;
    let level = first_level(cfg);
    let mut table = SMapTable::new(dim, k + 2, level.clone(), m + 3);
    let rep = CurrentRep::new(dim, k + 2, level.clone());
    let mut params = cfg.params();
    params.insert("level".into(), json!(level.fmt_ratio()));
    let ctx = table.ctx().clone();
    let zvar = ctx.var("z");
    let mut slots: Vec<Word> = vec![Word::new()];
    slots.extend(basis_words(dim, m, 1));
    let trust = move |e: &Expo| (e[0] as u32) < k;
    for a in &slots {
        for b in &slots {
            let p = (a.clone(), b.clone());
            let row = table.row(&p)?;
            // (D (x) 1) S(z) p
            let mut lhs = d_first_slot(&rep, &ctx, &row)?;
            // - S(z) (D (x) 1) p
            let dp = d_first_slot(&rep, &ctx, &PairVector::basis(&ctx, &p))?;
            lhs.acc(&table.apply(&dp)?.negate());
            // + d/dz S(z) p
            lhs.acc(&row.map_series(|s| s.derivative(zvar)));
            let bounded = lhs.map_series(|s| s.restrict(&trust));
            if !bounded.is_zero() {
                let ce = pair_counterexample(&bounded, &PairVector::new());
                return Ok(CheckReport::fail(
                    "shift_s1",
                    params,
                    ce.map(|c| prefixed(c, &format!("input {}", pair_string(&p)))),
                    "the translation operator does not differentiate the braiding",
                ));
            }
        }
    }
    Ok(CheckReport::pass(
        "shift_s1",
        params,
        format!(
            "commuting the first-slot translation operator past the braiding equals minus \
             its z-derivative on all {} basis pairs (modes <= {m})",
            slots.len() * slots.len()
        ),
    ))
}

/// Applies `D` to the first slot of every pair.
fn d_first_slot(
    rep: &CurrentRep<Rat>,
    ctx: &Arc<SeriesContext>,
    x: &PairVector<Rat>,
) -> Result<PairVector<Rat>> {
    let mut out = PairVector::new();
    for ((a, b), s) in x.terms() {
        let da = d_map(rep, ctx, &VacuumVector::basis(ctx, a))?;
        for (w, c) in da.terms() {
            out.push((w.clone(), b.clone()), c.mul(s));
        }
    }
    Ok(out)
}

/// Compact triple states used by the braid relation check.
#[derive(Debug, Clone, Default)]
struct TripleVector {
    terms: BTreeMap<(Word, Word, Word), TruncSeries<Rat>>,
}

impl TripleVector {
    fn push(&mut self, t: (Word, Word, Word), s: TruncSeries<Rat>) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&s);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn acc_scaled(&mut self, other: &TripleVector, c: &TruncSeries<Rat>) {
        for (t, s) in &other.terms {
            self.push(t.clone(), s.mul(c));
        }
    }

    fn minus(&self, other: &TripleVector) -> TripleVector {
        let mut out = self.clone();
        for (t, s) in &other.terms {
            out.push(t.clone(), s.neg());
        }
        out
    }

    fn restricted(&self, pred: &dyn Fn(&Expo) -> bool) -> TripleVector {
        let mut out = TripleVector::default();
        for (t, s) in &self.terms {
            out.push(t.clone(), s.restrict(pred));
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.terms.values().all(|s| s.is_zero())
    }

    fn first_term(&self) -> Option<(String, String)> {
        for (t, s) in &self.terms {
            if let Some((e, c)) = s.terms().next() {
                let lab =
                    format!("{} (x) {} (x) {}", label(&t.0), label(&t.1), label(&t.2));
                return Some((format!("{} : {}", lab, s.ctx().monomial_string(e)), c.fmt_ratio()));
            }
        }
        None
    }
}

/// Applies a substituted braiding to two chosen slots of a triple vector.
fn braid_slots(
    table: &mut SMapTable,
    cache: &mut BTreeMap<Pair, PairVector<Rat>>,
    x: &TripleVector,
    slots: (usize, usize),
    form: &LinearForm<Rat>,
    target: &Arc<SeriesContext>,
) -> Result<TripleVector> {
    let mut out = TripleVector::default();
    let items: Vec<((Word, Word, Word), TruncSeries<Rat>)> =
        x.terms.iter().map(|(t, s)| (t.clone(), s.clone())).collect();
    for (t, s) in items {
        let parts = [&t.0, &t.1, &t.2];
        let p = (parts[slots.0].clone(), parts[slots.1].clone());
        let row = substituted_row(table, cache, &p, form, target)?;
        for ((a, b), c) in row.terms() {
            let mut nt = [t.0.clone(), t.1.clone(), t.2.clone()];
            nt[slots.0] = a.clone();
            nt[slots.1] = b.clone();
            let mut one = TripleVector::default();
            one.push((nt[0].clone(), nt[1].clone(), nt[2].clone()), c.clone());
            out.acc_scaled(&one, &s);
        }
    }
    Ok(out)
}

/// The braid relation for the braiding map on triples: the two ways of
/// reversing three slots, with the middle argument expanded in the first
/// spectral variable, agree.
fn check_ybe_s2(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let level = first_level(cfg);
    let mut table = SMapTable::new(dim, k + 2, level.clone(), cfg.mode_bound + 3);
    let l_tab = {
        // mirror of the table window bound, used to pad the pair context
        (k as i16 + 1) + 2 * (cfg.mode_bound as i16 + 2) + 2
    };
    let band = (k + 1) as i16;
    let wid = l_tab + band + 2;
    let ctx2 = SeriesContext::builder(k + 2)
        .laurent("z1", -wid, wid)
        .laurent("z2", -wid, wid)
        .build();
    let z1 = LinearForm::var(&ctx2, "z1");
    let z2 = LinearForm::var(&ctx2, "z2");
    let z12 = LinearForm::var(&ctx2, "z1").plus(&ctx2, "z2");
    let v1 = ctx2.var("z1");
    let v2 = ctx2.var("z2");
    let trust = move |e: &Expo| {
        (e[0] as u32) < k && e[1 + v1].abs() <= band && e[1 + v2].abs() <= band
    };
    let mut params = cfg.params();
    params.insert(
        "window".into(),
        json!({"z1": [-wid, wid], "z2": [-wid, wid], "band": band, "level": level.fmt_ratio()}),
    );
    let gs = gens(dim, 1);
    let mut cache_z1: BTreeMap<Pair, PairVector<Rat>> = BTreeMap::new();
    let mut cache_z2: BTreeMap<Pair, PairVector<Rat>> = BTreeMap::new();
    let mut cache_z12: BTreeMap<Pair, PairVector<Rat>> = BTreeMap::new();
    let mut count = 0u32;
    for g1 in &gs {
        for g2 in &gs {
            for g3 in &gs {
                let mut start = TripleVector::default();
                start.push(
                    (
                        Word::from_slice(&[*g1]),
                        Word::from_slice(&[*g2]),
                        Word::from_slice(&[*g3]),
                    ),
                    TruncSeries::one(&ctx2),
                );
                // first slots (1,2) at z2, then (0,2) at z1+z2, then (0,1) at z1
                let a = braid_slots(&mut table, &mut cache_z2, &start, (1, 2), &z2, &ctx2)?;
                let a = braid_slots(&mut table, &mut cache_z12, &a, (0, 2), &z12, &ctx2)?;
                let lhs = braid_slots(&mut table, &mut cache_z1, &a, (0, 1), &z1, &ctx2)?;
                // first slots (0,1) at z1, then (0,2) at z1+z2, then (1,2) at z2
                let b = braid_slots(&mut table, &mut cache_z1, &start, (0, 1), &z1, &ctx2)?;
                let b = braid_slots(&mut table, &mut cache_z12, &b, (0, 2), &z12, &ctx2)?;
                let rhs = braid_slots(&mut table, &mut cache_z2, &b, (1, 2), &z2, &ctx2)?;
                let diff = lhs.minus(&rhs).restricted(&trust);
                if !diff.is_zero() {
                    let (monomial, lhs_c) = diff.first_term().expect("nonzero has a term");
                    return Ok(CheckReport::fail(
                        "ybe_s2",
                        params,
                        Some(Counterexample {
                            monomial: format!(
                                "triple {} (x) {} (x) {} ; residual {monomial}",
                                word_string(std::slice::from_ref(g1)),
                                word_string(std::slice::from_ref(g2)),
                                word_string(std::slice::from_ref(g3)),
                            ),
                            lhs: lhs_c,
                            rhs: "0".into(),
                        }),
                        "the two orders of reversing three slots disagree",
                    ));
                }
                count += 1;
            }
        }
    }
    Ok(CheckReport::pass(
        "ybe_s2",
        params,
        format!(
            "both orders of reversing three slots agree on all {count} mode-one generator \
             triples within the declared band"
        ),
    ))
}

/// The inversion symmetry of the braiding: the flip-conjugated map at `z`
/// inverts the map at `-z`.
fn check_unitarity_s3(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let m = cfg.mode_bound;
    let level = first_level(cfg);
    let mut table = SMapTable::new(dim, k + 2, level.clone(), m + 3);
    let ctx = table.ctx().clone();
    let neg = LinearForm::neg_var(&ctx, "z");
    let mut cache_neg: BTreeMap<Pair, PairVector<Rat>> = BTreeMap::new();
    let mut params = cfg.params();
    params.insert("level".into(), json!(level.fmt_ratio()));
    let trust = move |e: &Expo| (e[0] as u32) < k;
    let mut slots: Vec<Word> = vec![Word::new()];
    slots.extend(basis_words(dim, m, 1));
    let mut count = 0u32;
    for a in &slots {
        for b in &slots {
            let p = (a.clone(), b.clone());
            let x = PairVector::basis(&ctx, &p);
            let y = apply_substituted(&mut table, &mut cache_neg, &x, &neg, &ctx)?;
            let y = y.flip();
            let y = table.apply(&y)?;
            let y = y.flip();
            let mut diff = y;
            diff.acc(&x.negate());
            let bounded = diff.map_series(|s| s.restrict(&trust));
            if !bounded.is_zero() {
                let ce = pair_counterexample(&bounded, &PairVector::new());
                return Ok(CheckReport::fail(
                    "unitarity_s3",
                    params,
                    ce.map(|c| prefixed(c, &format!("input {}", pair_string(&p)))),
                    "the flip-conjugated braiding at z does not invert the braiding at -z",
                ));
            }
            count += 1;
        }
    }
    Ok(CheckReport::pass(
        "unitarity_s3",
        params,
        format!(
            "the flip-conjugated braiding at z inverts the braiding at -z on all {count} \
             basis pairs (modes <= {m})"
        ),
    ))
}

/// Outcome of a multiplier search: the minimal exponent clearing the
/// difference, or the residual at the cap.
enum RSearch {
    Cleared(u32),
    Stuck(Option<Counterexample>),
}

/// Multiplies a state difference by increasing powers of `form` until the
/// banded part vanishes.
fn search_r(
    diff: &VacuumVector<Rat>,
    ctx: &Arc<SeriesContext>,
    form: &LinearForm<Rat>,
    r_cap: u32,
    pred: &dyn Fn(&Expo) -> bool,
) -> RSearch {
    let fser = form.to_series(ctx);
    let mut cur = diff.clone();
    for r in 0..=r_cap {
        let banded = vac_restrict(&cur, pred);
        if banded.is_zero() {
            return RSearch::Cleared(r);
        }
        if r == r_cap {
            return RSearch::Stuck(vac_counterexample(&banded, &VacuumVector::new()));
        }
        cur = cur.mul_series(&fser);
    }
    unreachable!()
}

/// Shared construction for the locality and associativity checks: one
/// engine per (argument, target), memoized by target identity.
fn windowed_ctx(k_work: u32, names: &[&str], lo: i16, hi: i16, ymax: i16) -> Arc<SeriesContext> {
    let mut b = SeriesContext::builder(k_work);
    for n in names {
        b = b.laurent(n, lo, hi);
    }
    for l in 0..2 {
        b = b.taylor(&format!("y{l}"), ymax.max(0));
    }
    b.build()
}

/// The braided locality of fields: braiding the two states and swapping
/// the application order changes a product of fields by something killed
/// by a finite power of the argument difference.
fn check_s_locality(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let level = first_level(cfg);
    let kw = k + 2;
    let band = (k + 1) as i16;
    let r_pad = cfg.r_cap.min(6) as i16;
    let wid = band + r_pad + 2 * (k as i16 + 3) + 3;
    let ctx = windowed_ctx(kw, &["z1", "z2"], -wid, wid, 0);
    let caps = Caps { creator: (band + r_pad + 3) as u32, annihilator: 3 * k + cfg.mode_bound + 4 };
    let rep = CurrentRep::new(dim, kw, level.clone());
    let mut table = SMapTable::new(dim, kw + 2, level.clone(), cfg.mode_bound + 3);
    let z1 = LinearForm::var(&ctx, "z1");
    let z2 = LinearForm::var(&ctx, "z2");
    let zdiff = LinearForm::var(&ctx, "z1").minus(&ctx, "z2");
    let v1 = ctx.var("z1");
    let v2 = ctx.var("z2");
    let trust =
        move |e: &Expo| (e[0] as u32) < k && e[1 + v1].abs() <= band && e[1 + v2].abs() <= band;
    let mut params = cfg.params();
    params.insert(
        "window".into(),
        json!({"z": [-wid, wid], "band": band, "h_internal": kw, "level": level.fmt_ratio()}),
    );
    // Declared state set: mode-one generator pairs with distinct diagonal
    // and off-diagonal content, acting on the vacuum.
    let pairs: Vec<(CGen, CGen)> = vec![
        (CGen { r: 1, i: 0, j: 0 }, CGen { r: 1, i: 1, j: 1 }),
        (CGen { r: 1, i: 0, j: 1 }, CGen { r: 1, i: 1, j: 0 }),
    ];
    params.insert(
        "states".into(),
        json!(pairs
            .iter()
            .map(|(a, b)| format!(
                "{} , {}",
                word_string(std::slice::from_ref(a)),
                word_string(std::slice::from_ref(b))
            ))
            .collect::<Vec<_>>()),
    );
    let one = VacuumVector::one(&ctx);
    let mut cache: BTreeMap<Pair, PairVector<Rat>> = BTreeMap::new();
    let mut min_r = 0u32;
    for (gu, gv) in &pairs {
        let wu = Word::from_slice(&[*gu]);
        let wv = Word::from_slice(&[*gv]);
        // Right side: Y(v, z2) Y(u, z1) w.
        let inner =
            YEngine::new(&rep, &ctx, caps, z1.clone(), one.clone()).word(&wu)?;
        let rhs = YEngine::new(&rep, &ctx, caps, z2.clone(), inner).word(&wv)?;
        // Left side: fields of the braided pair in swapped order.
        let braided = apply_substituted(
            &mut table,
            &mut cache,
            &PairVector::basis(&ctx, &(wu.clone(), wv.clone())),
            &zdiff,
            &ctx,
        )?;
        let mut lhs = VacuumVector::new();
        let mut outer_memo: BTreeMap<Word, VacuumVector<Rat>> = BTreeMap::new();
        for ((a, b), c) in braided.terms() {
            let key = b.clone();
            let intermediate = match outer_memo.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = YEngine::new(&rep, &ctx, caps, z2.clone(), one.clone()).word(b)?;
                    outer_memo.insert(key, v.clone());
                    v
                }
            };
            let applied =
                YEngine::new(&rep, &ctx, caps, z1.clone(), intermediate).word(a)?;
            lhs.acc(&applied.mul_series(c));
        }
        let mut diff = lhs;
        diff.acc(&rhs.negate());
        match search_r(&diff, &ctx, &zdiff, cfg.r_cap, &trust) {
            RSearch::Cleared(r) => min_r = min_r.max(r),
            RSearch::Stuck(ce) => {
                params.insert("r_cap".into(), json!(cfg.r_cap));
                return Ok(CheckReport::fail(
                    "s_locality",
                    params,
                    ce.map(|c| {
                        prefixed(
                            c,
                            &format!(
                                "states {} , {}",
                                word_string(std::slice::from_ref(gu)),
                                word_string(std::slice::from_ref(gv))
                            ),
                        )
                    }),
                    "no multiplier power up to the cap clears the braided-locality difference",
                ));
            }
        }
    }
    params.insert("r".into(), json!(min_r));
    Ok(CheckReport::pass(
        "s_locality",
        params,
        format!(
            "the braided product difference is cleared by multiplier exponent r = {min_r} \
             on every declared state pair"
        ),
    ))
}

/// One associativity instance: compares composing fields sequentially
/// against the field of a field-applied state, returning the minimal
/// clearing exponent or the surviving counterexample.
fn weak_assoc_instance(
    rep: &CurrentRep<Rat>,
    ctx: &Arc<SeriesContext>,
    caps: Caps,
    u: &Word,
    v: &Word,
    w: &VacuumVector<Rat>,
    k: u32,
    r_cap: u32,
    band: i16,
) -> Result<RSearch> {
    let z0 = LinearForm::var(ctx, "z0");
    let z2 = LinearForm::var(ctx, "z2");
    let z02 = LinearForm::var(ctx, "z0").plus(ctx, "z2");
    let v0 = ctx.var("z0");
    let v2 = ctx.var("z2");
    let trust =
        move |e: &Expo| (e[0] as u32) < k && e[1 + v0].abs() <= band && e[1 + v2].abs() <= band;
    // Left: Y(u, z0+z2) Y(v, z2) w.
    let bstate = YEngine::new(rep, ctx, caps, z2.clone(), w.clone()).word(v)?;
    let lhs = YEngine::new(rep, ctx, caps, z02, bstate).word(u)?;
    // Right: Y(Y(u, z0) v, z2) w, with the inner state truncated to the
    // spectral powers that can still reach the band (the multiplier only
    // raises the first variable).
    let vstate = VacuumVector::basis(ctx, v);
    let inner = YEngine::new(rep, ctx, caps, z0, vstate).word(u)?;
    let inner = vac_restrict(&inner, &|e: &Expo| e[1 + v0] <= band as i16);
    let rhs = YEngine::new(rep, ctx, caps, z2, w.clone()).state(&inner)?;
    let mut diff = lhs;
    diff.acc(&rhs.negate());
    let form = LinearForm::var(ctx, "z0").plus(ctx, "z2");
    Ok(search_r(&diff, ctx, &form, r_cap, &trust))
}

/// Window and cap layout shared by the associativity-style checks.
fn assoc_layout(cfg: &RunConfig) -> (u32, i16, i16, i16, Caps) {
    let k = cfg.h_order;
    let kw = k + 3;
    let band = (k + 1) as i16;
    let r_pad = cfg.r_cap.min(6) as i16;
    let lo = -(band + r_pad + 2 * (k as i16 + 2) + 3);
    let hi = band + r_pad + 2 * (k as i16 + 2) + 3;
    let caps = Caps {
        creator: (band + r_pad + 4) as u32,
        annihilator: cfg.mode_bound + 2 * (k + 2) + 2,
    };
    (kw, band, lo, hi, caps)
}

/// Weak associativity of the field map on declared low-degree states.
fn check_weak_assoc(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let level = first_level(cfg);
    let (kw, band, lo, hi, caps) = assoc_layout(cfg);
    let ctx = windowed_ctx(kw, &["z0", "z2"], lo, hi, k as i16 + 1);
    let rep = CurrentRep::new(dim, kw, level.clone());
    let mut params = cfg.params();
    params.insert(
        "window".into(),
        json!({"z": [lo, hi], "band": band, "h_internal": kw, "level": level.fmt_ratio()}),
    );
    let triples: Vec<(CGen, CGen, Option<CGen>)> = vec![
        (CGen { r: 1, i: 0, j: 0 }, CGen { r: 1, i: 1, j: 1 }, None),
        (CGen { r: 1, i: 0, j: 1 }, CGen { r: 1, i: 1, j: 1 }, Some(CGen { r: 1, i: 1, j: 0 })),
    ];
    params.insert(
        "states".into(),
        json!(triples
            .iter()
            .map(|(u, v, w)| format!(
                "{} , {} , {}",
                word_string(std::slice::from_ref(u)),
                word_string(std::slice::from_ref(v)),
                w.map(|g| word_string(std::slice::from_ref(&g))).unwrap_or_else(|| "1".into())
            ))
            .collect::<Vec<_>>()),
    );
    let mut min_r = 0u32;
    for (gu, gv, gw) in &triples {
        let wu = Word::from_slice(&[*gu]);
        let wv = Word::from_slice(&[*gv]);
        let w = match gw {
            None => VacuumVector::one(&ctx),
            Some(g) => VacuumVector::basis(&ctx, &Word::from_slice(&[*g])),
        };
        match weak_assoc_instance(&rep, &ctx, caps, &wu, &wv, &w, k, cfg.r_cap, band)? {
            RSearch::Cleared(r) => min_r = min_r.max(r),
            RSearch::Stuck(ce) => {
                params.insert("r_cap".into(), json!(cfg.r_cap));
                return Ok(CheckReport::fail(
                    "weak_assoc",
                    params,
                    ce.map(|c| {
                        prefixed(
                            c,
                            &format!(
                                "states {} , {} , {}",
                                label(&wu),
                                label(&wv),
                                gw.map(|g| word_string(std::slice::from_ref(&g)))
                                    .unwrap_or_else(|| "1".into())
                            ),
                        )
                    }),
                    "no multiplier power up to the cap clears the associativity difference",
                ));
            }
        }
    }
    params.insert("r".into(), json!(min_r));
    Ok(CheckReport::pass(
        "weak_assoc",
        params,
        format!(
            "sequential and composed field application agree after multiplier exponent \
             r = {min_r} on every declared state triple"
        ),
    ))
}

/// The combined compatibility identity, verified through its equivalent
/// split into weak associativity and braided locality.
fn check_jacobi(cfg: &RunConfig) -> Result<CheckReport> {
    let assoc = check_weak_assoc(cfg)?;
    if !assoc.passed() {
        return Ok(CheckReport::fail(
            "jacobi",
            assoc.params,
            assoc.counterexample,
            format!("the associativity half failed: {}", assoc.detail),
        ));
    }
    let loc = check_s_locality(cfg)?;
    if !loc.passed() {
        return Ok(CheckReport::fail(
            "jacobi",
            loc.params,
            loc.counterexample,
            format!("the locality half failed: {}", loc.detail),
        ));
    }
    let mut params = cfg.params();
    params.insert("assoc_r".into(), json!(assoc.params.get("r")));
    params.insert("locality_r".into(), json!(loc.params.get("r")));
    Ok(CheckReport::pass(
        "jacobi",
        params,
        "the combined compatibility identity holds through its equivalent split: weak \
         associativity and braided locality both pass on the declared states",
    ))
}

/// The module form of the compatibility identity for the module structure
/// the currents define on the vacuum module itself: the module vertex map
/// is the current action, whose vacuum property and weak associativity
/// together give the module structure (and with it module locality).
fn check_main_module_jacobi(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let level = first_level(cfg);
    let (kw, band, lo, hi, caps) = assoc_layout(cfg);
    let ctx = windowed_ctx(kw, &["z0", "z2"], lo, hi, k as i16 + 1);
    let rep = CurrentRep::new(dim, kw, level.clone());
    let mut params = cfg.params();
    params.insert(
        "window".into(),
        json!({"z": [lo, hi], "band": band, "h_internal": kw, "level": level.fmt_ratio()}),
    );
    // Vacuum property of the module map on a depth-one vector.
    let target = VacuumVector::basis(&ctx, &Word::from_slice(&[CGen { r: 1, i: 0, j: 1 }]));
    let id = YEngine::new(&rep, &ctx, caps, LinearForm::var(&ctx, "z0"), target.clone())
        .word(&Word::new())?;
    if vac_counterexample(&id, &target).is_some() {
        return Ok(CheckReport::fail(
            "main_module_jacobi",
            params,
            None,
            "the module field of the vacuum state is not the identity",
        ));
    }
    // One associativity instance for the module map.
    let wu = Word::from_slice(&[CGen { r: 1, i: 0, j: 0 }]);
    let wv = Word::from_slice(&[CGen { r: 1, i: 1, j: 1 }]);
    let w = VacuumVector::one(&ctx);
    match weak_assoc_instance(&rep, &ctx, caps, &wu, &wv, &w, k, cfg.r_cap, band)? {
        RSearch::Cleared(r) => {
            params.insert("r".into(), json!(r));
            Ok(CheckReport::pass(
                "main_module_jacobi",
                params,
                format!(
                    "the module map built from the current action satisfies the vacuum \
                     property and weak associativity (r = {r}); these two properties are \
                     what the module identity reduces to on the declared states"
                ),
            ))
        }
        RSearch::Stuck(ce) => Ok(CheckReport::fail(
            "main_module_jacobi",
            params,
            ce,
            "the module associativity instance does not clear within the multiplier cap",
        )),
    }
}

/// The module correspondence in both directions: forward, the current
/// action defines a module vertex map (vacuum property plus weak
/// associativity); backward, the composite current is recovered from the
/// field of the degree-one creation state, and the recovered currents
/// satisfy the exchange identity at matching level.
pub fn verify_main_correspondence(cfg: &RunConfig) -> Result<CheckReport> {
    let k = cfg.h_order;
    let dim = cfg.dim;
    let level = first_level(cfg);
    let mut params = cfg.params();
    params.insert("level".into(), json!(level.fmt_ratio()));

    // Forward: the module map is the current family by construction; its
    // module structure reduces to the vacuum property plus associativity.
    let fwd = check_main_module_jacobi(cfg)?;
    if !fwd.passed() {
        return Ok(CheckReport::fail(
            "main_correspondence",
            fwd.params,
            fwd.counterexample,
            format!("forward direction failed: {}", fwd.detail),
        ));
    }

    // Backward: rebuild the current from fields of the creation state.
    let kw = k + 1;
    let zlo = -((3 * k + 3) as i16 + 2);
    let zhi = (k + 4) as i16;
    let ctx = SeriesContext::builder(kw)
        .laurent("z", zlo, zhi)
        .taylor("y0", 0)
        .taylor("y1", 0)
        .build();
    let caps = Caps::shallow(kw);
    let rep = CurrentRep::new(dim, kw, level.clone());
    let band = (k + 1) as i16;
    let zvar = ctx.var("z");
    let trust = move |e: &Expo| (e[0] as u32) < k && e[1 + zvar].abs() <= band;
    let mut targets: Vec<(String, VacuumVector<Rat>)> =
        vec![("1".into(), VacuumVector::one(&ctx))];
    let w12 = Word::from_slice(&[CGen { r: 1, i: 0, j: 1 }]);
    targets.push((label(&w12), VacuumVector::basis(&ctx, &w12)));
    for (name, target) in &targets {
        let state = vac_state(target, dim, 1);
        let direct =
            rep.apply_single(&ctx, &state, 0, &LinearForm::var(&ctx, "z"), caps)?;
        let mut engine =
            YEngine::new(&rep, &ctx, caps, LinearForm::var(&ctx, "z"), target.clone());
        let mut rebuilt: Tensor<Rat, VacuumVector<Rat>> = Tensor::zero(dim, 1);
        for i in 0..dim {
            for j in 0..dim {
                let field = engine.word(&Word::from_slice(&[CGen { r: 1, i, j }]))?;
                let mut entry = field.mul_series(&neg_h_pow(&ctx, 1));
                if i == j {
                    entry.acc(target);
                }
                rebuilt.push(i, j, entry);
            }
        }
        if let Some(ce) = state_counterexample(&direct, &rebuilt, &trust) {
            return Ok(CheckReport::fail(
                "main_correspondence",
                params,
                Some(prefixed(ce, &format!("target {name}"))),
                "the current rebuilt from the degree-one field disagrees with the direct \
                 current action",
            ));
        }
    }

    // Backward, exchange half: the recovered currents are the composite
    // currents, whose two-variable exchange identity is verified by the
    // dedicated current check at the same level.
    let mut wcfg = cfg.clone();
    wcfg.level = Some(vec![level.clone()]);
    let rw = crate::currents::verify_current_identity("reW", &wcfg)?;
    if !rw.passed() {
        return Ok(CheckReport::fail(
            "main_correspondence",
            rw.params,
            rw.counterexample,
            format!("backward exchange identity failed: {}", rw.detail),
        ));
    }
    params.insert("forward_r".into(), json!(fwd.params.get("r")));
    Ok(CheckReport::pass(
        "main_correspondence",
        params,
        "forward: the current action satisfies the vacuum property and weak associativity; \
         backward: the current is recovered exactly from the degree-one field and the \
         recovered family satisfies the exchange identity",
    ))
}

/// Dispatches a vertex-structure axiom check by name.
pub fn verify_qva_axiom(name: &str, cfg: &RunConfig) -> Result<CheckReport> {
    match name {
        "vacuum" => check_vacuum(cfg),
        "qva1_vs_ekqva1" => check_qva1_vs_ekqva1(cfg),
        "shift_s1" => check_shift_s1(cfg),
        "ybe_s2" => check_ybe_s2(cfg),
        "unitarity_s3" => check_unitarity_s3(cfg),
        "s_locality" => check_s_locality(cfg),
        "weak_assoc" => check_weak_assoc(cfg),
        "jacobi" => check_jacobi(cfg),
        "main_module_jacobi" => check_main_module_jacobi(cfg),
        other => Err(Error::InvalidConfig(format!("unknown vertex axiom: {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: u32, h_order: u32) -> RunConfig {
        RunConfig { dim, h_order, mode_bound: 2, ..RunConfig::default() }
    }

    #[test]
    fn field_of_single_creator_on_vacuum() {
        // Independent oracle: on the vacuum the lowering half acts as the
        // identity, so the field of t(-1)[0,1] is the raising family alone:
        // Y(t(-1)[0,1], z) 1 = sum_{b >= 1} z^(b-1) t(-b)[0,1] 1, exactly,
        // with no h-dependence after normalization.
        let ctx = SeriesContext::builder(3)
            .laurent("z", -2, 6)
            .taylor("y0", 1)
            .taylor("y1", 1)
            .build();
        let rep = CurrentRep::new(2, 3, Rat::from_int(0));
        let caps = Caps { creator: 5, annihilator: 4 };
        let one = VacuumVector::one(&ctx);
        let w = Word::from_slice(&[CGen { r: 1, i: 0, j: 1 }]);
        let val = vertex_y(&rep, &ctx, caps, &VacuumVector::basis(&ctx, &w), &LinearForm::var(&ctx, "z"), &one)
            .unwrap();
        let zvar = ctx.var("z");
        let mut expected = VacuumVector::new();
        for b in 1..=5u32 {
            let mut e = ctx.zero_expo();
            e[1 + zvar] = (b - 1) as i16;
            let mut s = TruncSeries::zero(&ctx);
            s.push(e, Rat::from_int(1));
            expected.push(Word::from_slice(&[CGen { r: b, i: 0, j: 1 }]), s);
        }
        // restrict to the window where all modes are kept
        let pred = |e: &Expo| e[1 + zvar] <= 4;
        assert!(
            vac_counterexample(&vac_restrict(&val, &pred), &vac_restrict(&expected, &pred))
                .is_none(),
            "field on vacuum must be the raising family"
        );
    }

    #[test]
    fn translation_raises_modes() {
        // D 1 = 0, and D t(-a)[i,j] 1 = a t(-a-1)[i,j] 1.
        let ctx = SeriesContext::builder(2).build();
        let rep = CurrentRep::new(2, 2, Rat::from_int(1));
        let one = VacuumVector::one(&ctx);
        assert!(d_map(&rep, &ctx, &one).unwrap().is_zero());
        for a in 1..=2u32 {
            let w = Word::from_slice(&[CGen { r: a, i: 0, j: 1 }]);
            let dv = d_map(&rep, &ctx, &VacuumVector::basis(&ctx, &w)).unwrap();
            let expected = VacuumVector::basis(&ctx, &Word::from_slice(&[CGen {
                r: a + 1,
                i: 0,
                j: 1,
            }]))
            .mul_series(&TruncSeries::constant(&ctx, Rat::from_int(a as i64)));
            assert!(
                vac_counterexample(&dv, &expected).is_none(),
                "translation must raise the mode with weight a = {a}"
            );
        }
    }

    #[test]
    fn translation_is_a_derivation_on_pairs() {
        // Leibniz on a degree-two word, with products re-expanded in the
        // ordered basis by the representation's normal ordering.
        let ctx = SeriesContext::builder(3).build();
        let rep = CurrentRep::new(2, 3, Rat::from_int(0));
        let g1 = CGen { r: 1, i: 0, j: 0 };
        let g2 = CGen { r: 1, i: 1, j: 1 };
        let w = Word::from_slice(&[g1, g2]);
        let dv = d_map(&rep, &ctx, &VacuumVector::basis(&ctx, &w)).unwrap();
        let mut expected = rep
            .yangian()
            .normal_order(&ctx, &[CGen { r: 2, i: 0, j: 0 }, g2]);
        expected.acc(&rep.yangian().normal_order(&ctx, &[g1, CGen { r: 2, i: 1, j: 1 }]));
        assert!(
            vac_counterexample(&dv, &expected).is_none(),
            "translation must satisfy the Leibniz rule on ordered pairs"
        );
    }

    #[test]
    fn braiding_fixes_vacuum_pair_and_is_classically_trivial() {
        let mut table = SMapTable::new(2, 4, Rat::from_int(0), 4);
        let vac_pair = (Word::new(), Word::new());
        let row = table.row(&vac_pair).unwrap();
        let expected = PairVector::basis(table.ctx(), &vac_pair);
        assert!(pair_counterexample(&row, &expected).is_none(), "vacuum pair must be fixed");
        // every seeded row is the identity modulo h
        let mut slots: Vec<Word> = vec![Word::new()];
        slots.extend(basis_words(2, 2, 1));
        for a in &slots {
            for b in &slots {
                let p = (a.clone(), b.clone());
                let row = table.row(&p).unwrap();
                let classical = row.map_series(|s| s.restrict(&|e: &Expo| e[0] == 0));
                let expected = PairVector::basis(table.ctx(), &p)
                    .map_series(|s| s.restrict(&|e: &Expo| e[0] == 0));
                assert!(
                    pair_counterexample(&classical, &expected).is_none(),
                    "braiding must be the identity modulo h at {}",
                    pair_string(&p)
                );
            }
        }
    }

    #[test]
    fn braiding_row_matches_frozen_exchange_tail() {
        // Frozen first-order tail of one braiding row at level zero.  The
        // freeze is certified independently of the solver internals: the
        // exact defining-system replay runs inside `ensure`, the classical
        // part of every row is the identity, each output pair conserves
        // the diagonal weight of the input (every creator t[i,j] carries
        // weight e_i - e_j and all transitions below are weight zero), and
        // the coefficients obey the flip symmetry that the inversion axiom
        // demands of the first-order term (the row for the flipped pair
        // carries the flipped outputs with equal coefficients).
        let mut table = SMapTable::new(2, 4, Rat::from_int(0), 3);
        let p = (
            Word::from_slice(&[CGen { r: 1, i: 0, j: 1 }]),
            Word::from_slice(&[CGen { r: 1, i: 1, j: 0 }]),
        );
        let row = table.row(&p).unwrap();
        let h1 = row.map_series(|s| s.coeff_h(1));
        let mut lines: Vec<String> = Vec::new();
        for (q, s) in h1.terms() {
            for (e, c) in s.terms() {
                lines.push(format!(
                    "{} ; {} ; {}",
                    pair_string(q),
                    table.ctx().monomial_string(e),
                    c.fmt_ratio()
                ));
            }
        }
        let got = lines.join("\n");
        let expected = "\
t(-1)[0,0] (x) t(-1)[0,0] ; h^0 ; z^-1 ; 1/1
t(-1)[0,0] (x) t(-1)[1,1] ; h^0 ; z^-1 ; -1/1
t(-1)[0,1] (x) t(-1)[1,0] ; h^0 ; z^-1 ; 2/1
t(-1)[1,1] (x) t(-1)[0,0] ; h^0 ; z^-1 ; -1/1
t(-1)[1,1] (x) t(-1)[1,1] ; h^0 ; z^-1 ; 1/1";
        assert_eq!(got, expected, "frozen braiding tail changed");
    }


    #[test]
    fn vacuum_axiom_passes() {
        let report = check_vacuum(&cfg(2, 2)).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn family_comparison_passes_both_leg_counts() {
        for n in [1u32, 2] {
            let c = RunConfig { n, ..cfg(2, 2) };
            let report = check_qva1_vs_ekqva1(&c).unwrap();
            assert!(report.passed(), "n = {n}: {report:?}");
        }
    }

    #[test]
    fn shift_compatibility_passes() {
        let report = check_shift_s1(&cfg(2, 2)).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn inversion_symmetry_passes() {
        let report = check_unitarity_s3(&cfg(2, 2)).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn braid_relation_passes() {
        let report = check_ybe_s2(&cfg(2, 2)).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn locality_clears_with_small_multiplier() {
        let c = RunConfig { r_cap: 4, ..cfg(2, 2) };
        let report = check_s_locality(&c).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
