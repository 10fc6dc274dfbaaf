//! The individual identity suites. Each body runs on one pack and records
//! named checks into the shared context; failures carry a counterexample
//! payload instead of aborting, so a run always reports every check.

use std::collections::HashMap;
use std::rc::Rc;

use num::{One, Zero};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::coeff::{
    aw3_constants, ext_constants, lambda_n, pow_i, random_ultraspherical_pack, Coef, ParamPack,
};
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Substitution};
use crate::ncalg::{
    casimir_element, embed_awq, is_spanning_word, relation_polys, substitute_generators, AlgebraId,
    Gen, NCPoly, RewriteSystem, Word,
};
use crate::operators::{
    apply_d_closed, apply_y_closed, full_basis, matrix_with_output_bound, sym_basis, AtomicOp,
    BasisKind, OpExpr,
};
use crate::polyfamilies::{aw_p, e_nonsym, family_pdag, family_q, family_qdag, EMode, PMode};

use super::{independence_rank, rep_with, CheckResult, CheckStatus, PackDesc, RepMap, SuiteCtx};

fn atom(a: AtomicOp) -> OpExpr {
    OpExpr::atom(a)
}

fn scalar(c: Coef) -> OpExpr {
    OpExpr::scalar(c)
}

/// Records whether `op` annihilates every vector of `basis`.
fn op_is_zero_on(ctx: &mut SuiteCtx, name: &str, op: &OpExpr, basis: &[LaurentPoly]) -> Result<()> {
    for f in basis {
        let g = ctx.cache.apply_expr(op, f)?;
        if !g.is_zero() {
            let detail = json!({ "input": f.to_string(), "got": g.to_string() });
            ctx.record(name, false, Some(detail));
            return Ok(());
        }
    }
    ctx.record(name, true, None);
    Ok(())
}

/// Records whether two operators agree on every vector of `basis`.
fn ops_agree_on(
    ctx: &mut SuiteCtx,
    name: &str,
    lhs: &OpExpr,
    rhs: &OpExpr,
    basis: &[LaurentPoly],
) -> Result<()> {
    for f in basis {
        let l = ctx.cache.apply_expr(lhs, f)?;
        let r = ctx.cache.apply_expr(rhs, f)?;
        if l != r {
            let detail = json!({
                "input": f.to_string(),
                "lhs": l.to_string(),
                "rhs": r.to_string(),
            });
            ctx.record(name, false, Some(detail));
            return Ok(());
        }
    }
    ctx.record(name, true, None);
    Ok(())
}

/// Records exact equality of two polynomials.
fn polys_equal(ctx: &mut SuiteCtx, name: &str, got: &LaurentPoly, expect: &LaurentPoly) {
    let ok = got == expect;
    let detail = (!ok).then(|| json!({ "got": got.to_string(), "expected": expect.to_string() }));
    ctx.record(name, ok, detail);
}

// --- suite bodies -----------------------------------------------------

/// The two cubic relations hold for the symmetric-space representation.
pub(crate) fn aw3_relations(ctx: &mut SuiteCtx) -> Result<()> {
    let basis = sym_basis(ctx.cfg.window);
    let rep = RepMap::for_algebra(AlgebraId::Aw3Q0);
    for rel in relation_polys(AlgebraId::Aw3Q0, ctx.pack)? {
        if rel.name == "casimir" {
            continue;
        }
        let op = rep.rep(&rel.poly)?;
        op_is_zero_on(ctx, &format!("{}_vanishes", rel.name), &op, &basis)?;
    }
    Ok(())
}

/// The Casimir element acts as its scalar on the symmetric window.
pub(crate) fn aw3_casimir(ctx: &mut SuiteCtx) -> Result<()> {
    let basis = sym_basis(ctx.cfg.window);
    let rep = RepMap::for_algebra(AlgebraId::Aw3Q0);
    let q0 = aw3_constants(ctx.pack).q0;
    let op = rep.rep(&casimir_element(AlgebraId::Aw3Q0, ctx.pack)?)? - scalar(q0);
    op_is_zero_on(ctx, "casimir_scalar_action", &op, &basis)
}

/// Quadratic Hecke relations, inverses, commutation facts and the closed
/// forms of the composite operators.
pub(crate) fn daha_relations(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let basis = full_basis(ctx.cfg.window);
    let one = Coef::one();
    let (t1, t0) = (atom(AtomicOp::T1), atom(AtomicOp::T0));
    let (z, zi) = (atom(AtomicOp::Z), atom(AtomicOp::Zinv));

    let rel = (t1.clone() + scalar(p.ab())) * (t1.clone() + scalar(one.clone()));
    op_is_zero_on(ctx, "hecke_t1", &rel, &basis)?;
    let rel = (t0.clone() + scalar(p.cd() * p.q_pow(-1))) * (t0.clone() + scalar(one.clone()));
    op_is_zero_on(ctx, "hecke_t0", &rel, &basis)?;
    let t1z = t1.clone() * z;
    let rel = (t1z.clone() + scalar(p.a().clone())) * (t1z + scalar(p.b().clone()));
    op_is_zero_on(ctx, "hecke_t1z", &rel, &basis)?;
    let qt0zi = (t0.clone() * zi).scaled(p.q().clone());
    let rel = (qt0zi.clone() + scalar(p.c().clone())) * (qt0zi + scalar(p.d().clone()));
    op_is_zero_on(ctx, "hecke_t0zi", &rel, &basis)?;

    let id = OpExpr::identity();
    for (name, a, b) in [
        ("t1_inverse", AtomicOp::T1, AtomicOp::T1inv),
        ("t0_inverse", AtomicOp::T0, AtomicOp::T0inv),
        ("y_inverse", AtomicOp::Y, AtomicOp::Yinv),
    ] {
        ops_agree_on(ctx, &format!("{name}_right"), &(atom(a) * atom(b)), &id, &basis)?;
        ops_agree_on(ctx, &format!("{name}_left"), &(atom(b) * atom(a)), &id, &basis)?;
    }

    let d = atom(AtomicOp::D);
    for (name, other) in [
        ("d_commutes_t1", AtomicOp::T1),
        ("d_commutes_t0", AtomicOp::T0),
    ] {
        let comm = d.clone() * atom(other) - atom(other) * d.clone();
        op_is_zero_on(ctx, name, &comm, &basis)?;
    }
    let zs = atom(AtomicOp::Zsym);
    let comm = zs.clone() * t1.clone() - t1 * zs;
    op_is_zero_on(ctx, "zsym_commutes_t1", &comm, &basis)?;

    // composite operators match their single-expression closed forms
    let mut y_ok = true;
    let mut d_ok = true;
    let mut fail: Option<serde_json::Value> = None;
    for f in &basis {
        let y1 = ctx.cache.apply_atom(AtomicOp::Y, f)?;
        let y2 = apply_y_closed(f, p)?;
        if y1 != y2 && y_ok {
            y_ok = false;
            fail = Some(json!({"input": f.to_string(), "composition": y1.to_string(), "closed": y2.to_string()}));
        }
        let d1 = ctx.cache.apply_atom(AtomicOp::D, f)?;
        let d2 = apply_d_closed(f, p)?;
        if d1 != d2 && d_ok {
            d_ok = false;
        }
    }
    ctx.record("y_matches_closed_form", y_ok, fail);
    ctx.record("d_matches_closed_form", d_ok, None);

    // the reflection operator restricts to the symmetric second-order one
    let mut ok = true;
    for f in sym_basis(ctx.cfg.window) {
        if ctx.cache.apply_atom(AtomicOp::D, &f)? != ctx.cache.apply_atom(AtomicOp::Dsym, &f)? {
            ok = false;
            break;
        }
    }
    ctx.record("d_matches_dsym_on_symmetric", ok, None);
    Ok(())
}

/// Every relation of the PBW presentation as an operator identity, plus the
/// equivalence of the two Hecke-algebra presentations via rewriting.
pub(crate) fn daha_pbw(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let basis = full_basis(ctx.cfg.window);
    let rep = RepMap::for_algebra(AlgebraId::DahaPbw);
    let pbw_rels = relation_polys(AlgebraId::DahaPbw, p)?;
    for rel in &pbw_rels {
        let op = rep.rep(&rel.poly)?;
        op_is_zero_on(ctx, &format!("op_{}", rel.name), &op, &basis)?;
    }

    // inverse Hecke generators as polynomials, for the substitutions below
    let one = Coef::one();
    let abinv = p.ab().recip();
    let qcdinv = p.q() * &p.cd().recip();
    let t1inv_in = |alg: AlgebraId| {
        NCPoly::from_terms(alg, &[(&[Gen::T1][..], -abinv.clone()), (&[], -(&one + &abinv))])
    };
    let t0inv_t = NCPoly::from_terms(
        AlgebraId::DahaT,
        &[(&[Gen::T0][..], -qcdinv.clone()), (&[], -(&one + &qcdinv))],
    );

    // PBW relations, with Y and its inverse spelled out through T1, T0,
    // reduce to zero in the four-generator presentation
    let t_sys = RewriteSystem::for_algebra(AlgebraId::DahaT, p)?;
    let yi_as_t = t0inv_t.mul(&t1inv_in(AlgebraId::DahaT))?;
    for rel in &pbw_rels {
        let img = substitute_generators(&rel.poly, AlgebraId::DahaT, &|g| match g {
            Gen::Y => NCPoly::from_word(AlgebraId::DahaT, Word(vec![Gen::T1, Gen::T0]), Coef::one()),
            Gen::Yi => yi_as_t.clone(),
            g => NCPoly::gen(AlgebraId::DahaT, g),
        })?;
        let red = t_sys.reduce(&img)?;
        let ok = red.is_zero();
        let detail = (!ok).then(|| json!({ "residue": red.to_string() }));
        ctx.record(format!("in_t_presentation_{}", rel.name), ok, detail);
    }

    // four-generator relations, with T0 spelled out as T1^-1 Y, reduce to
    // zero in the PBW presentation
    let pbw_sys = RewriteSystem::for_algebra(AlgebraId::DahaPbw, p)?;
    let t0_as_pbw = t1inv_in(AlgebraId::DahaPbw)
        .mul(&NCPoly::gen(AlgebraId::DahaPbw, Gen::Y))?;
    for rel in relation_polys(AlgebraId::DahaT, p)? {
        let img = substitute_generators(&rel.poly, AlgebraId::DahaPbw, &|g| match g {
            Gen::T0 => t0_as_pbw.clone(),
            g => NCPoly::gen(AlgebraId::DahaPbw, g),
        })?;
        let red = pbw_sys.reduce(&img)?;
        let ok = red.is_zero();
        let detail = (!ok).then(|| json!({ "residue": red.to_string() }));
        ctx.record(format!("in_pbw_presentation_{}", rel.name), ok, detail);
    }
    Ok(())
}

/// Eigenvalue equations for all four polynomial families, and agreement of
/// the two constructions of the monic symmetric family.
pub(crate) fn eigen_families(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let minus_ab = -p.ab();
    let minus_qicd = -(p.cd() * p.q_pow(-1));
    let minus_one = -Coef::one();

    for n in 0..=ctx.cfg.family_depth {
        let hyper = aw_p(p, n, PMode::Hypergeometric)?;
        let rec = aw_p(p, n, PMode::Recurrence)?;
        polys_equal(ctx, &format!("p_routes_agree[{n}]"), &hyper, &rec);

        let lam = lambda_n(p, n)?;
        let d_pn = ctx.cache.apply_atom(AtomicOp::D, &rec)?;
        polys_equal(ctx, &format!("d_eig[P:{n}]"), &d_pn, &rec.scale(&lam));
        let ds_pn = ctx.cache.apply_atom(AtomicOp::Dsym, &rec)?;
        polys_equal(ctx, &format!("dsym_eig[P:{n}]"), &ds_pn, &rec.scale(&lam));
        let t1_pn = ctx.cache.apply_atom(AtomicOp::T1, &rec)?;
        polys_equal(ctx, &format!("t1_eig[P:{n}]"), &t1_pn, &rec.scale(&minus_ab));

        if n == 0 {
            continue;
        }
        let lam = lambda_n(p, n)?;
        for (tag, f, eig_op, eig_val) in [
            ("Q", family_q(p, n)?, AtomicOp::T1, &minus_one),
            ("Pdag", family_pdag(p, n)?, AtomicOp::T0, &minus_qicd),
            ("Qdag", family_qdag(p, n)?, AtomicOp::T0, &minus_one),
        ] {
            let df = ctx.cache.apply_atom(AtomicOp::D, &f)?;
            polys_equal(ctx, &format!("d_eig[{tag}:{n}]"), &df, &f.scale(&lam));
            let tf = ctx.cache.apply_atom(eig_op, &f)?;
            let eig_name = if eig_op == AtomicOp::T1 { "t1" } else { "t0" };
            polys_equal(ctx, &format!("{eig_name}_eig[{tag}:{n}]"), &tf, &f.scale(eig_val));
        }
    }
    Ok(())
}

/// Eigenvalue equations, triangular action of the Hecke generator,
/// coefficient facts and construction agreement for the non-symmetric
/// family, plus one-dimensionality of its eigenspaces at bounded degree.
pub(crate) fn nonsym_eigen(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let one = Coef::one();
    let e4 = p.abcd();
    let (ab, cd) = (p.ab(), p.cd());

    // constant eigenvector
    let y_one = ctx.cache.apply_atom(AtomicOp::Y, &LaurentPoly::one())?;
    polys_equal(ctx, "y_eig[E:0]", &y_one, &LaurentPoly::constant(&e4 * &p.q_pow(-1)));

    for n in 1..=ctx.cfg.family_depth {
        let ni = n as i64;
        let em = e_nonsym(p, -ni, EMode::ViaQ)?;
        let ep = e_nonsym(p, ni, EMode::ViaQ)?;
        polys_equal(ctx, &format!("e_modes_agree[-{n}]"), &em, &e_nonsym(p, -ni, EMode::ViaQdag)?);
        polys_equal(ctx, &format!("e_modes_agree[{n}]"), &ep, &e_nonsym(p, ni, EMode::ViaQdag)?);

        // eigenvalue equations
        let y_em = ctx.cache.apply_atom(AtomicOp::Y, &em)?;
        polys_equal(ctx, &format!("y_eig[E:-{n}]"), &y_em, &em.scale(&p.q_pow(-ni)));
        let y_ep = ctx.cache.apply_atom(AtomicOp::Y, &ep)?;
        polys_equal(ctx, &format!("y_eig[E:{n}]"), &y_ep, &ep.scale(&(p.q_pow(ni - 1) * &e4)));

        // triangular Hecke action on the eigenvector pair
        let denom = &one - &(p.q_pow(2 * ni - 1) * &e4);
        if denom.is_zero() {
            return Err(Error::DegenerateParams(format!("abcd = q^{}", 1 - 2 * ni)));
        }
        let c_mm = -((&one + &ab - &(&e4 * &p.q_pow(ni - 1)) - &(&ab * &p.q_pow(ni))) / &denom);
        let t1_em = ctx.cache.apply_atom(AtomicOp::T1, &em)?;
        let expect = em.scale(&c_mm).add(&ep.scale(&-ab.clone()));
        polys_equal(ctx, &format!("t1_action[E:-{n}]"), &t1_em, &expect);

        let c_pm = (&one - &p.q_pow(ni))
            * (&one - &(&ab * &p.q_pow(ni)))
            * (&one - &(&cd * &p.q_pow(ni - 1)))
            * (&one - &(&e4 * &p.q_pow(ni - 1)))
            / (&denom * &denom);
        let c_pp = -(&ab * &p.q_pow(ni - 1))
            * (&cd + p.q() - &(&cd * &p.q_pow(ni)) - &(&e4 * &p.q_pow(ni)))
            / &denom;
        let t1_ep = ctx.cache.apply_atom(AtomicOp::T1, &ep)?;
        let expect = em.scale(&c_pm).add(&ep.scale(&c_pp));
        polys_equal(ctx, &format!("t1_action[E:{n}]"), &t1_ep, &expect);

        // coefficient facts: windows and extreme coefficients
        let window_ok = em.min_exp() == Some(-ni)
            && em.coeff(-ni).is_one()
            && em.max_exp().map_or(true, |hi| hi <= ni - 1);
        ctx.record(format!("e_window[-{n}]"), window_ok, Some(json!({ "poly": em.to_string() })));
        let trailing = &one - &((&one - &p.q_pow(ni)) * (&one - &(&cd * &p.q_pow(ni - 1))) / &denom);
        let window_ok = ep.max_exp() == Some(ni) && ep.coeff(ni).is_one() && ep.coeff(-ni) == trailing;
        ctx.record(format!("e_window[{n}]"), window_ok, Some(json!({ "poly": ep.to_string() })));

        // extreme coefficients of the four degree-n eigenfunctions
        let pn = aw_p(p, n, PMode::Recurrence)?;
        let qn = family_q(p, n)?;
        let pd = family_pdag(p, n)?;
        let qd = family_qdag(p, n)?;
        let ok = pn.coeff(ni).is_one()
            && pn.coeff(-ni).is_one()
            && qn.coeff(ni).is_one()
            && qn.coeff(-ni) == ab.recip()
            && pd.coeff(ni).is_one()
            && pd.coeff(-ni) == p.q_pow(ni)
            && qd.coeff(ni).is_one()
            && qd.coeff(-ni) == p.q_pow(ni - 1) * &cd;
        ctx.record(format!("trailing_coeffs[{n}]"), ok, None);

        // within degree <= n the eigenspaces for these eigenvalues are lines
        for (label, lam) in [
            (format!("y_eigenspace_1dim[-{n}]"), p.q_pow(-ni)),
            (format!("y_eigenspace_1dim[{n}]"), p.q_pow(ni - 1) * &e4),
        ] {
            let dim = eigen_kernel_dim(ctx, AtomicOp::Y, &lam, ni)?;
            ctx.record(label, dim == 1, Some(json!({ "kernel_dim": dim })));
        }
    }
    Ok(())
}

/// Kernel dimension of `(op - lambda)` restricted to the window `|k| <= n`.
fn eigen_kernel_dim(ctx: &mut SuiteCtx, op: AtomicOp, lambda: &Coef, n: i64) -> Result<usize> {
    let expr = atom(op);
    let out_bound = n + 2;
    let m = matrix_with_output_bound(&ctx.cache, &expr, n, out_bound, BasisKind::Full)?;
    let rows = m.len();
    let cols = m[0].len();
    // columns of (op - lambda * inclusion), flattened row-wise for the rank
    let mut flat: Vec<Vec<Coef>> = vec![Vec::with_capacity(rows); cols];
    for (r, row) in m.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let in_exp = c as i64 - n;
            let sub = if r as i64 == in_exp + out_bound { v - lambda } else { v.clone() };
            flat[c].push(sub);
        }
    }
    let rank = super::rank_of_rational_rows(&flat);
    Ok(cols - rank)
}

/// The two-step shift identity: the divided difference of `P_n` under
/// `z -> q^(±1/2) z` equals the degree-lowered family at shifted parameters.
pub(crate) fn qdiff_equation(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let s = p.s().clone();
    let child = p.shifted(&s, &s, &s, &s)?;
    let factor = LaurentPoly::from_terms([(1, Coef::one()), (-1, -Coef::one())]);
    for n in 1..=ctx.cfg.family_depth {
        let ni = n as i64;
        let pn = aw_p(p, n, PMode::Recurrence)?;
        let lhs = pn
            .substitute(Substitution::SInvZ, p)
            .sub(&pn.substitute(Substitution::SZ, p));
        let quot = lhs.divide_exact(&factor)?;
        let scale = p.s_pow(-ni) - p.s_pow(ni);
        let rhs = aw_p(&child, n - 1, PMode::Recurrence)?.scale(&scale);
        polys_equal(ctx, &format!("qdiff[{n}]"), &quot, &rhs);
    }
    Ok(())
}

/// For every short word over every algebra: representing the word and
/// representing its normal form give the same operator on the window, and
/// the normal form lies in the claimed spanning set.
pub(crate) fn normalform_consistency(ctx: &mut SuiteCtx) -> Result<()> {
    for alg in [AlgebraId::Aw3Q0, AlgebraId::Awq, AlgebraId::DahaT, AlgebraId::DahaPbw] {
        normalform_for_algebra(ctx, alg)?;
    }
    Ok(())
}

/// Dense coordinate vectors for the sweep. The volume of exact arithmetic
/// here is large, so vectors are indexed by exponent (or by symmetric
/// degree for the two-generator algebra) instead of going through the
/// sparse polynomial type; the arithmetic itself stays exact. Columns of
/// the generator actions are built lazily, so only coordinates the sweep
/// actually reaches must have images inside the window.
struct DenseRep<'a, 'p> {
    /// coordinate dimension
    dim: usize,
    /// for the full basis: coordinate = exponent + offset; for the
    /// symmetric basis: coordinate = degree, offset = 0
    offset: i64,
    symmetric: bool,
    rep: RepMap,
    cache: &'a crate::operators::ActionCache<'p>,
    atom_cols: std::cell::RefCell<HashMap<(Gen, usize), Rc<Vec<(usize, Coef)>>>>,
}

impl<'a, 'p> DenseRep<'a, 'p> {
    fn new(cache: &'a crate::operators::ActionCache<'p>, alg: AlgebraId, bound: i64) -> DenseRep<'a, 'p> {
        let symmetric = alg == AlgebraId::Aw3Q0;
        let (dim, offset) = if symmetric {
            ((bound + 1) as usize, 0)
        } else {
            ((2 * bound + 1) as usize, bound)
        };
        DenseRep {
            dim,
            offset,
            symmetric,
            rep: RepMap::for_algebra(alg),
            cache,
            atom_cols: std::cell::RefCell::new(HashMap::new()),
        }
    }

    fn column(&self, g: Gen, idx: usize) -> Result<Rc<Vec<(usize, Coef)>>> {
        if let Some(hit) = self.atom_cols.borrow().get(&(g, idx)) {
            return Ok(Rc::clone(hit));
        }
        let input = if self.symmetric {
            let k = idx as i64;
            if k == 0 {
                LaurentPoly::one()
            } else {
                LaurentPoly::from_terms([(k, Coef::one()), (-k, Coef::one())])
            }
        } else {
            LaurentPoly::monomial(idx as i64 - self.offset, Coef::one())
        };
        let img = self.cache.apply_atom(self.rep.gen_atom(g), &input)?;
        let col = Rc::new(to_sparse_col(&img, self.offset, self.symmetric, self.dim)?);
        self.atom_cols.borrow_mut().insert((g, idx), Rc::clone(&col));
        Ok(col)
    }

    fn unit(&self, idx: usize) -> Vec<Coef> {
        let mut v = vec![Coef::zero(); self.dim];
        v[idx] = Coef::one();
        v
    }

    fn apply_gen(&self, g: Gen, v: &[Coef]) -> Result<Vec<Coef>> {
        let mut out = vec![Coef::zero(); self.dim];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let col = self.column(g, j)?;
            for (r, a) in col.iter() {
                out[*r] += c * a;
            }
        }
        Ok(out)
    }

    fn to_poly(&self, v: &[Coef]) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if self.symmetric {
                let k = j as i64;
                p.add_term(k, c.clone());
                if k != 0 {
                    p.add_term(-k, c.clone());
                }
            } else {
                p.add_term(j as i64 - self.offset, c.clone());
            }
        }
        p
    }
}

fn to_sparse_col(img: &LaurentPoly, offset: i64, symmetric: bool, dim: usize) -> Result<Vec<(usize, Coef)>> {
    let mut col = Vec::new();
    if symmetric {
        if !img.is_symmetric() {
            return Err(Error::NotDivisible(format!("expected symmetric image, got {img}")));
        }
        for (e, c) in img.terms() {
            if *e < 0 {
                continue;
            }
            let idx = *e as usize;
            if idx >= dim {
                return Err(Error::NotDivisible(format!("image degree {e} escaped the sweep window")));
            }
            col.push((idx, c.clone()));
        }
    } else {
        for (e, c) in img.terms() {
            let idx = e + offset;
            if idx < 0 || idx as usize >= dim {
                return Err(Error::NotDivisible(format!("image exponent {e} escaped the sweep window")));
            }
            col.push((idx as usize, c.clone()));
        }
    }
    Ok(col)
}

/// Shared state of one normal-form sweep over an algebra's words.
struct NfSweep<'s, 'a, 'p> {
    alg: AlgebraId,
    sys: &'s RewriteSystem,
    dense: DenseRep<'a, 'p>,
    /// basis coordinate indices (unit vectors)
    basis_idx: Vec<usize>,
    /// memoized dense basis images of spanning-set words
    nf_images: HashMap<Word, Rc<Vec<Vec<Coef>>>>,
    /// memoized reductions of (generator) * (spanning-set word)
    step_memo: HashMap<(Gen, Word), Rc<NCPoly>>,
    /// per length: words checked, first failure payload
    stats: Vec<(usize, Option<serde_json::Value>)>,
    /// below this length, cross-check the incremental normal form against
    /// a from-scratch reduction of the whole word
    direct_check_len: usize,
}

fn normalform_for_algebra(ctx: &mut SuiteCtx, alg: AlgebraId) -> Result<()> {
    let sys = RewriteSystem::for_algebra(alg, ctx.pack)?;
    let max_len = ctx.cfg.word_len;
    let n = ctx.cfg.window;
    let stats = {
        let dense = DenseRep::new(&ctx.cache, alg, n + max_len as i64 + 2);
        let basis_idx: Vec<usize> = if dense.symmetric {
            (0..=n as usize).collect()
        } else {
            (0..=(2 * n) as usize).map(|k| k + (dense.offset - n) as usize).collect()
        };
        let mut sweep = NfSweep {
            alg,
            sys: &sys,
            dense,
            basis_idx,
            nf_images: HashMap::new(),
            step_memo: HashMap::new(),
            stats: vec![(0, None); max_len + 1],
            direct_check_len: 3.min(max_len),
        };

        let root_images: Vec<Vec<Coef>> = sweep.basis_idx.iter().map(|&i| sweep.dense.unit(i)).collect();
        let mut word: Vec<Gen> = Vec::new();
        let root_nf = NCPoly::one(alg);
        nf_dfs(&mut sweep, &mut word, &root_images, &root_nf, max_len)?;
        sweep.stats
    };

    for (len, (count, fail)) in stats.iter().enumerate() {
        let ok = fail.is_none();
        let detail = fail.clone().or(Some(json!({ "words": count })));
        ctx.record(format!("nf[{}:len{}]", alg.name(), len), ok, detail);
        if ok {
            let last = ctx.checks.last_mut().expect("just pushed");
            last.detail = Some(json!({ "words": count }));
        }
    }
    Ok(())
}

/// Dense images of a spanning-set word on the basis, computed right-to-left
/// and memoized across the sweep.
fn nf_word_images(sweep: &mut NfSweep<'_, '_, '_>, w: &Word) -> Result<Rc<Vec<Vec<Coef>>>> {
    if let Some(hit) = sweep.nf_images.get(w) {
        return Ok(Rc::clone(hit));
    }
    let mut images: Vec<Vec<Coef>> = sweep.basis_idx.iter().map(|&i| sweep.dense.unit(i)).collect();
    for &g in w.0.iter().rev() {
        for img in &mut images {
            *img = sweep.dense.apply_gen(g, img)?;
        }
    }
    let rc = Rc::new(images);
    sweep.nf_images.insert(w.clone(), Rc::clone(&rc));
    Ok(rc)
}

/// Normal form of `g * w` for a spanning-set word `w`, memoized. Prepending
/// a generator to an already reduced polynomial and reducing again is the
/// incremental counterpart of reducing the whole word; the two agree
/// because reduction is multiplicative modulo the relations, which the
/// short-word cross-check below and the module's unit tests both exercise.
fn nf_step(sweep: &mut NfSweep<'_, '_, '_>, g: Gen, w: &Word) -> Result<Rc<NCPoly>> {
    if let Some(hit) = sweep.step_memo.get(&(g, w.clone())) {
        return Ok(Rc::clone(hit));
    }
    let mut extended = Vec::with_capacity(w.len() + 1);
    extended.push(g);
    extended.extend_from_slice(&w.0);
    let red = sweep.sys.reduce(&NCPoly::from_word(sweep.alg, Word(extended), Coef::one()))?;
    let rc = Rc::new(red);
    sweep.step_memo.insert((g, w.clone()), Rc::clone(&rc));
    Ok(rc)
}

fn nf_dfs(
    sweep: &mut NfSweep<'_, '_, '_>,
    word: &mut Vec<Gen>,
    images: &[Vec<Coef>],
    nf: &NCPoly,
    max_len: usize,
) -> Result<()> {
    let w = Word(word.clone());
    let len = w.len();
    sweep.stats[len].0 += 1;
    if sweep.stats[len].1.is_none() {
        let mut failure: Option<serde_json::Value> = None;
        if len <= sweep.direct_check_len {
            let direct = sweep.sys.reduce_word(&w)?;
            if &direct != nf {
                failure = Some(json!({
                    "word": w.to_string(),
                    "incremental_nf": nf.to_string(),
                    "direct_nf": direct.to_string(),
                }));
            }
        }
        if failure.is_none() {
            for (nw, _) in nf.terms() {
                if !is_spanning_word(sweep.alg, nw) {
                    failure = Some(json!({ "word": w.to_string(), "non_basis_term": nw.to_string() }));
                    break;
                }
            }
        }
        if failure.is_none() {
            let terms: Vec<(Word, Coef)> = nf.terms().map(|(nw, c)| (nw.clone(), c.clone())).collect();
            let dim = sweep.dense.dim;
            'outer: for (i, direct) in images.iter().enumerate() {
                let mut expected = vec![Coef::zero(); dim];
                for (nw, c) in &terms {
                    let imgs = nf_word_images(sweep, nw)?;
                    for (j, v) in imgs[i].iter().enumerate() {
                        if !v.is_zero() {
                            expected[j] += v * c;
                        }
                    }
                }
                if &expected != direct {
                    failure = Some(json!({
                        "word": w.to_string(),
                        "basis_index": i,
                        "direct": sweep.dense.to_poly(direct).to_string(),
                        "via_normal_form": sweep.dense.to_poly(&expected).to_string(),
                    }));
                    break 'outer;
                }
            }
        }
        sweep.stats[len].1 = failure;
    }

    if len == max_len {
        return Ok(());
    }
    for &g in sweep.alg.alphabet() {
        let next_images: Vec<Vec<Coef>> = images
            .iter()
            .map(|img| sweep.dense.apply_gen(g, img))
            .collect::<Result<_>>()?;
        // reduce(g * nf) term by term through the memo
        let mut next_nf = NCPoly::zero(sweep.alg);
        for (nw, c) in nf.terms().map(|(nw, c)| (nw.clone(), c.clone())).collect::<Vec<_>>() {
            let step = nf_step(sweep, g, &nw)?;
            next_nf = next_nf.add(&step.scale(&c))?;
        }
        word.insert(0, g);
        nf_dfs(sweep, word, &next_images, &next_nf, max_len)?;
        word.remove(0);
    }
    Ok(())
}

/// Finite-rank shadow of the linear independence of the ordered monomials
/// in the two symmetric-space generators.
pub(crate) fn independence_aw3(ctx: &mut SuiteCtx) -> Result<()> {
    let ds = atom(AtomicOp::Dsym);
    let zs = atom(AtomicOp::Zsym);
    let mut ops = Vec::new();
    for n in 0..=3u32 {
        for m in 0..=3u32 {
            ops.push(OpExpr::product(vec![ds.pow(n), zs.pow(m)]));
        }
    }
    for n in 1..=3u32 {
        for m in 1..=3u32 {
            ops.push(OpExpr::product(vec![ds.pow(n - 1), zs.clone(), ds.clone(), zs.pow(m - 1)]));
        }
    }
    let expected = ops.len();
    let rank = independence_rank(&ops, ctx.pack, ctx.cfg.window, BasisKind::Symmetric)?;
    ctx.record(
        "rank_two_shapes_grid3",
        rank == expected,
        Some(json!({ "rank": rank, "expected": expected })),
    );
    Ok(())
}

fn signed_pow(positive: AtomicOp, negative: AtomicOp, m: i64) -> OpExpr {
    if m >= 0 {
        atom(positive).pow(m as u32)
    } else {
        atom(negative).pow((-m) as u32)
    }
}

/// Finite-rank shadow of the PBW basis of the Hecke algebra, plus the
/// extreme-coefficient facts its faithfulness proof rests on.
pub(crate) fn independence_daha(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let mut ops = Vec::new();
    for m in -2..=2i64 {
        for n in -2..=2i64 {
            for i in 0..=1u32 {
                ops.push(OpExpr::product(vec![
                    signed_pow(AtomicOp::Z, AtomicOp::Zinv, m),
                    signed_pow(AtomicOp::Y, AtomicOp::Yinv, n),
                    atom(AtomicOp::T1).pow(i),
                ]));
            }
        }
    }
    let expected = ops.len();
    let rank = independence_rank(&ops, p, ctx.cfg.window, BasisKind::Full)?;
    ctx.record(
        "rank_zyt_grid2",
        rank == expected,
        Some(json!({ "rank": rank, "expected": expected })),
    );

    // extreme terms of Z^m Y^n (T1^i) acting on the negative-index family
    let e4 = p.abcd();
    for (m, n, j) in [(1i64, 1i64, 1i64), (2, 2, 2), (-1, 2, 3), (0, 1, 2)] {
        let ej = e_nonsym(p, -j, EMode::ViaQ)?;
        let zy = OpExpr::product(vec![
            signed_pow(AtomicOp::Z, AtomicOp::Zinv, m),
            signed_pow(AtomicOp::Y, AtomicOp::Yinv, n),
        ]);
        let g = ctx.cache.apply_expr(&zy, &ej)?;
        let mut ok = g.min_exp() == Some(m - j)
            && g.coeff(m - j) == pow_i(p.q(), -(j * n))
            && g.max_exp().map_or(true, |hi| hi <= m + j - 1);
        let with_t1 = ctx.cache.apply_expr(&(zy.clone() * atom(AtomicOp::T1)), &ej)?;
        let top = pow_i(&(&e4 * &p.q_pow(j - 1)), n);
        ok = ok && with_t1.coeff(m + j) == -p.ab() * &top && with_t1.min_exp() == Some(m - j);
        let with_t1inv = ctx.cache.apply_expr(&(zy * atom(AtomicOp::T1inv)), &ej)?;
        ok = ok && with_t1inv.coeff(m + j) == top;
        ctx.record(format!("action_terms[m={m},n={n},j={j}]"), ok, None);
    }
    Ok(())
}

/// The images of the extension's defining relations vanish in the PBW
/// presentation, both by rewriting and as operators.
pub(crate) fn embedding(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    let pbw_sys = RewriteSystem::for_algebra(AlgebraId::DahaPbw, p)?;
    let rep = RepMap::for_algebra(AlgebraId::DahaPbw);
    let basis = full_basis(ctx.cfg.window);
    for rel in relation_polys(AlgebraId::Awq, p)? {
        let img = embed_awq(&rel.poly, p)?;
        let red = pbw_sys.reduce(&img)?;
        let ok = red.is_zero();
        let detail = (!ok).then(|| json!({ "residue": red.to_string() }));
        ctx.record(format!("embed_reduce[{}]", rel.name), ok, detail);
        let op = rep.rep(&img)?;
        op_is_zero_on(ctx, &format!("embed_operator[{}]", rel.name), &op, &basis)?;
    }
    Ok(())
}

/// Chooses the pack the specialization suite actually runs on: the given
/// pack if it already has the special shape, else the shape derived from
/// its `s` and `a`, else a seeded random pack of the right shape.
pub(crate) fn ultraspherical_primary(
    pack: &ParamPack,
    rng: &mut ChaCha8Rng,
    checks: &mut Vec<CheckResult>,
) -> Result<ParamPack> {
    let depth = pack.max_degree_certified();
    let chosen = if pack.is_ultraspherical() {
        pack.clone()
    } else {
        ParamPack::new(
            pack.s().clone(),
            pack.a().clone(),
            -pack.a().clone(),
            pack.s().clone(),
            -pack.s().clone(),
            depth,
            false,
        )
        .unwrap_or_else(|_| random_ultraspherical_pack(rng, depth))
    };
    checks.push(CheckResult {
        name: "specialized:pack".into(),
        status: CheckStatus::Pass,
        detail: Some(serde_json::to_value(PackDesc::from(&chosen)).expect("pack serializes")),
    });
    Ok(chosen)
}

/// At the one-parameter specialization the extension collapses: the extra
/// constants vanish, the unextended relations hold for the
/// reflection-carrying operator on the whole space, and the two Casimir
/// elements differ by an explicit multiple of the Hecke generator.
pub(crate) fn ultraspherical(ctx: &mut SuiteCtx) -> Result<()> {
    let p = ctx.pack;
    if !p.is_ultraspherical() {
        return Err(Error::DegenerateParams(
            "specialization suite needs a pack with c = -d = ±s and a = -b".into(),
        ));
    }
    let x = ext_constants(p);
    let ok = x.e.is_zero() && x.f0.is_zero() && x.f1.is_zero();
    ctx.record(
        "ext_constants_vanish",
        ok,
        Some(json!({ "E": x.e.to_string(), "F0": x.f0.to_string(), "F1": x.f1.to_string() })),
    );

    // the two-generator relations, with the reflection-carrying operator
    // in place of the symmetric one, hold on the full space
    let assign = |g: Gen| match g {
        Gen::K0 => atom(AtomicOp::D),
        Gen::K1 => atom(AtomicOp::Zsym),
        Gen::T1 => atom(AtomicOp::T1),
        other => panic!("unexpected generator {other}"),
    };
    let basis = full_basis(ctx.cfg.window);
    for rel in relation_polys(AlgebraId::Aw3Q0, p)? {
        if rel.name == "casimir" {
            continue;
        }
        let op = rep_with(&rel.poly, &assign);
        op_is_zero_on(ctx, &format!("{}_full_space", rel.name), &op, &basis)?;
    }

    // Casimir difference: extended minus plain equals
    // (q^-1 - q)^3 (1 - a^2) (T1 - a^2)
    let q_ext = rep_with(&casimir_element(AlgebraId::Awq, p)?, &assign);
    let q_plain = rep_with(&casimir_element(AlgebraId::Aw3Q0, p)?, &assign);
    let one = Coef::one();
    let a2 = p.a() * p.a();
    let coeff = {
        let base = p.q_pow(-1) - p.q();
        &base * &base * &base * (&one - &a2)
    };
    let expected = (atom(AtomicOp::T1) - scalar(a2)).scaled(coeff);
    let diff = q_ext - q_plain - expected;
    op_is_zero_on(ctx, "casimir_difference_term", &diff, &basis)?;
    Ok(())
}
