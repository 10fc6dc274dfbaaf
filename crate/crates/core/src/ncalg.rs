//! Free associative algebras over small generator alphabets, the rewrite
//! systems that bring their elements to the spanning-set normal forms, the
//! Casimir elements, centrality tests and the embedding map.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use serde::Serialize;

use crate::coeff::{Coef, ParamPack};
use crate::error::{Error, Result};

/// Generator symbols across all supported algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    K0,
    K1,
    T1,
    T0,
    Z,
    Zi,
    Y,
    Yi,
}

impl Gen {
    pub fn name(self) -> &'static str {
        match self {
            Gen::K0 => "K0",
            Gen::K1 => "K1",
            Gen::T1 => "T1",
            Gen::T0 => "T0",
            Gen::Z => "Z",
            Gen::Zi => "Zi",
            Gen::Y => "Y",
            Gen::Yi => "Yi",
        }
    }

    pub fn parse(s: &str) -> Result<Gen> {
        Ok(match s {
            "K0" => Gen::K0,
            "K1" => Gen::K1,
            "T1" => Gen::T1,
            "T0" => Gen::T0,
            "Z" => Gen::Z,
            "Zi" => Gen::Zi,
            "Y" => Gen::Y,
            "Yi" => Gen::Yi,
            other => return Err(Error::Parse(format!("unknown generator {other:?}"))),
        })
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four presented algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgebraId {
    /// Quadratic algebra on `K0, K1` with the Casimir pinned to its scalar.
    Aw3Q0,
    /// Central extension on `K0, K1, T1` with the Casimir pinned.
    Awq,
    /// Double affine Hecke algebra presented on `T1, T0, Z, Zi`.
    DahaT,
    /// The same algebra presented on `T1, Z, Zi, Y, Yi` in PBW form.
    DahaPbw,
}

impl AlgebraId {
    pub fn alphabet(self) -> &'static [Gen] {
        match self {
            AlgebraId::Aw3Q0 => &[Gen::K0, Gen::K1],
            AlgebraId::Awq => &[Gen::K0, Gen::K1, Gen::T1],
            AlgebraId::DahaT => &[Gen::T1, Gen::T0, Gen::Z, Gen::Zi],
            AlgebraId::DahaPbw => &[Gen::T1, Gen::Z, Gen::Zi, Gen::Y, Gen::Yi],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgebraId::Aw3Q0 => "aw3q0",
            AlgebraId::Awq => "awq",
            AlgebraId::DahaT => "daha_t",
            AlgebraId::DahaPbw => "daha_pbw",
        }
    }

    pub fn parse(s: &str) -> Result<AlgebraId> {
        Ok(match s {
            "aw3q0" => AlgebraId::Aw3Q0,
            "awq" => AlgebraId::Awq,
            "daha_t" => AlgebraId::DahaT,
            "daha_pbw" => AlgebraId::DahaPbw,
            other => return Err(Error::Parse(format!("unknown algebra {other:?}"))),
        })
    }

    fn contains(self, g: Gen) -> bool {
        self.alphabet().contains(&g)
    }
}

/// A word in an algebra's generators. Ordered by length first, then
/// lexicographically in the fixed generator order, so polynomial iteration
/// is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Gen>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn single(g: Gen) -> Self {
        Word(vec![g])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat3(prefix: &[Gen], middle: &[Gen], suffix: &[Gen]) -> Self {
        let mut v = Vec::with_capacity(prefix.len() + middle.len() + suffix.len());
        v.extend_from_slice(prefix);
        v.extend_from_slice(middle);
        v.extend_from_slice(suffix);
        Word(v)
    }

    /// Parses a comma-separated generator list, e.g. `"K1,K0,K0"`.
    /// The empty string is the empty word.
    pub fn parse(src: &str, algebra: AlgebraId) -> Result<Word> {
        let src = src.trim();
        if src.is_empty() {
            return Ok(Word::empty());
        }
        let mut gens = Vec::new();
        for part in src.split(',') {
            let g = Gen::parse(part.trim())?;
            if !algebra.contains(g) {
                return Err(Error::Parse(format!(
                    "generator {} is not in the alphabet of {}",
                    g,
                    algebra.name()
                )));
            }
            gens.push(g);
        }
        Ok(Word(gens))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let names: Vec<&str> = self.0.iter().map(|g| g.name()).collect();
        f.write_str(&names.join(","))
    }
}

/// Number of inverted `(K1, K0)` pairs: positions `i < j` with `w[i] = K1`
/// and `w[j] = K0`. This is the termination statistic of the two-generator
/// reduction.
pub fn rho(w: &Word) -> usize {
    let mut k1_seen = 0usize;
    let mut count = 0usize;
    for g in &w.0 {
        match g {
            Gen::K1 => k1_seen += 1,
            Gen::K0 => count += k1_seen,
            _ => {}
        }
    }
    count
}

/// A noncommutative polynomial: finitely many words with nonzero rational
/// coefficients, over a fixed algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCPoly {
    algebra: AlgebraId,
    terms: BTreeMap<Word, Coef>,
}

impl NCPoly {
    pub fn zero(algebra: AlgebraId) -> Self {
        NCPoly { algebra, terms: BTreeMap::new() }
    }

    pub fn one(algebra: AlgebraId) -> Self {
        Self::from_word(algebra, Word::empty(), Coef::one())
    }

    pub fn constant(algebra: AlgebraId, c: Coef) -> Self {
        Self::from_word(algebra, Word::empty(), c)
    }

    pub fn gen(algebra: AlgebraId, g: Gen) -> Self {
        assert!(algebra.contains(g), "generator {g} not in {}", algebra.name());
        Self::from_word(algebra, Word::single(g), Coef::one())
    }

    pub fn from_word(algebra: AlgebraId, w: Word, c: Coef) -> Self {
        let mut p = Self::zero(algebra);
        p.add_term(w, c);
        p
    }

    /// Scaled sum of words over a fixed algebra; words given as slices.
    pub fn from_terms(algebra: AlgebraId, terms: &[(&[Gen], Coef)]) -> Self {
        let mut p = Self::zero(algebra);
        for (w, c) in terms {
            p.add_term(Word(w.to_vec()), c.clone());
        }
        p
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (degree, then lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Coef)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Coef {
        self.terms.get(w).cloned().unwrap_or_else(Coef::zero)
    }

    pub fn add_term(&mut self, w: Word, c: Coef) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same(&self, rhs: &Self) -> Result<()> {
        if self.algebra != rhs.algebra {
            return Err(Error::AlgebraMismatch { expected: self.algebra, got: rhs.algebra });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        NCPoly {
            algebra: self.algebra,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Coef) -> Self {
        if c.is_zero() {
            return Self::zero(self.algebra);
        }
        NCPoly {
            algebra: self.algebra,
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    /// Free-algebra product (word concatenation, bilinear).
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        let mut out = Self::zero(self.algebra);
        for (w1, c1) in self.terms() {
            for (w2, c2) in rhs.terms() {
                let mut w = w1.0.clone();
                w.extend_from_slice(&w2.0);
                out.add_term(Word(w), c1 * c2);
            }
        }
        Ok(out)
    }

    /// `[x, y] = xy - yx`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// q-commutator `q^(1/2) xy - q^(-1/2) yx`, with `q^(1/2) = s` exact.
    pub fn q_commutator(&self, rhs: &Self, pack: &ParamPack) -> Result<Self> {
        let fwd = self.mul(rhs)?.scale(pack.s());
        let bwd = rhs.mul(self)?.scale(&pack.s_pow(-1));
        fwd.sub(&bwd)
    }

    /// Canonical JSON form: terms in canonical order, coefficients as
    /// decimal strings.
    pub fn to_json_terms(&self) -> Vec<NCTermJson> {
        self.terms
            .iter()
            .map(|(w, c)| NCTermJson {
                word: w.0.iter().map(|g| g.name().to_string()).collect(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }
}

/// One JSON term of a noncommutative polynomial.
#[derive(Debug, Clone, Serialize)]
pub struct NCTermJson {
    pub word: Vec<String>,
    pub num: String,
    pub den: String,
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*{w}")?;
        }
        Ok(())
    }
}

/// A defining relation of a presentation: a polynomial that is zero in the
/// algebra, together with the word the reduction is oriented to eliminate.
#[derive(Debug, Clone)]
pub struct NamedRelation {
    pub name: &'static str,
    pub pattern: Vec<Gen>,
    pub poly: NCPoly,
}

fn relation(name: &'static str, pattern: &[Gen], poly: NCPoly) -> NamedRelation {
    debug_assert!(!poly.coeff(&Word(pattern.to_vec())).is_zero(), "{name}: pattern must occur in the relation");
    NamedRelation { name, pattern: pattern.to_vec(), poly }
}

/// The Casimir element of the two-generator quadratic algebra, or of its
/// central extension, as an explicit polynomial with scalar constants from
/// the pack. Its leading word is `K1 K0 K1 K0` with coefficient one.
pub fn casimir_element(alg: AlgebraId, p: &ParamPack) -> Result<NCPoly> {
    use Gen::{K0, K1, T1};
    let k = crate::coeff::aw3_constants(p);
    let qq = p.q() + &p.q_pow(-1); // q + q^-1
    let q2c = p.q_pow(2) + Coef::one() + p.q_pow(-2); // q^2 + 1 + q^-2
    let w = p.q() + &Coef::one() + &p.q_pow(-1); // q + 1 + q^-1
    match alg {
        AlgebraId::Aw3Q0 => Ok(NCPoly::from_terms(
            alg,
            &[
                (&[K1, K0, K1, K0][..], Coef::one()),
                (&[K0, K1, K0, K1], -q2c),
                (&[K0, K0, K1, K1], qq.clone()),
                (&[K0, K0], &qq * &k.c0),
                (&[K1, K1], &qq * &k.c1),
                (&[K0, K1], &k.b * &w),
                (&[K1, K0], k.b.clone()),
                (&[K0], &w * &k.d0),
                (&[K1], &w * &k.d1),
            ],
        )),
        AlgebraId::Awq => {
            let x = crate::coeff::ext_constants(p);
            let ab = p.ab();
            let b_eff = &k.b + &(&x.e * &ab);
            Ok(NCPoly::from_terms(
                alg,
                &[
                    (&[K1, K0, K1, K0][..], Coef::one()),
                    (&[K0, K1, K0, K1], -q2c),
                    (&[K0, K0, K1, K1], qq.clone()),
                    (&[K0, K0], &qq * &k.c0),
                    (&[K1, K1], &qq * &k.c1),
                    (&[K0, K1], &b_eff * &w),
                    (&[K1, K0], b_eff.clone()),
                    (&[T1, K0, K1], &x.e * &w),
                    (&[T1, K1, K0], x.e.clone()),
                    (&[K0], &w * &(&k.d0 + &(&x.f0 * &ab))),
                    (&[T1, K0], &w * &x.f0),
                    (&[K1], &w * &(&k.d1 + &(&x.f1 * &ab))),
                    (&[T1, K1], &w * &x.f1),
                    (&[T1], x.g.clone()),
                    (&[], &x.g * &ab),
                ],
            ))
        }
        other => Err(Error::Parse(format!("no Casimir element defined for {}", other.name()))),
    }
}

/// The defining relations of each presentation as vanishing polynomials, in
/// the fixed order the rewrite systems try them: local inverse
/// cancellations, then quadratic relations, then cross-commutation moves,
/// then the Casimir pinning for the quotient algebras.
pub fn relation_polys(alg: AlgebraId, p: &ParamPack) -> Result<Vec<NamedRelation>> {
    use Gen::{K0, K1, T0, T1, Y, Yi, Z, Zi};
    let one = Coef::one();
    let (a, b, c, d, q) = (p.a(), p.b(), p.c(), p.d(), p.q());
    let ab = p.ab();
    let cd = p.cd();
    let qicd = &cd * &p.q_pow(-1); // q^-1 cd
    let ab1 = &ab + &one; // ab + 1
    let cd1 = &qicd + &one; // q^-1 cd + 1

    // T1^2 + (ab+1) T1 + ab = 0, shared by three presentations
    let t1_quad = |alg: AlgebraId| {
        relation(
            "t1_quadratic",
            &[T1, T1],
            NCPoly::from_terms(alg, &[(&[T1, T1][..], one.clone()), (&[T1], ab1.clone()), (&[], ab.clone())]),
        )
    };
    // T1 Z = Z^-1 T1 + (ab+1) Z^-1 - (a+b) and its Z^-1 twin
    let t1_z = |alg: AlgebraId| {
        relation(
            "t1_z",
            &[T1, Z],
            NCPoly::from_terms(
                alg,
                &[
                    (&[T1, Z][..], one.clone()),
                    (&[Zi, T1], -one.clone()),
                    (&[Zi], -ab1.clone()),
                    (&[], a + b),
                ],
            ),
        )
    };
    let t1_zi = |alg: AlgebraId| {
        relation(
            "t1_zi",
            &[T1, Zi],
            NCPoly::from_terms(
                alg,
                &[
                    (&[T1, Zi][..], one.clone()),
                    (&[Z, T1], -one.clone()),
                    (&[Zi], ab1.clone()),
                    (&[], -(a + b)),
                ],
            ),
        )
    };
    let cancel = |alg: AlgebraId, name: &'static str, x: Gen, y: Gen| {
        relation(
            name,
            &[x, y],
            NCPoly::from_terms(alg, &[(&[x, y][..], one.clone()), (&[], -one.clone())]),
        )
    };

    match alg {
        AlgebraId::DahaT => {
            let alg = AlgebraId::DahaT;
            Ok(vec![
                cancel(alg, "z_zi", Z, Zi),
                cancel(alg, "zi_z", Zi, Z),
                t1_quad(alg),
                relation(
                    "t0_quadratic",
                    &[T0, T0],
                    NCPoly::from_terms(alg, &[(&[T0, T0][..], one.clone()), (&[T0], cd1.clone()), (&[], qicd.clone())]),
                ),
                t1_z(alg),
                t1_zi(alg),
                relation(
                    "t0_z",
                    &[T0, Z],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[T0, Z][..], one.clone()),
                            (&[Zi, T0], -q.clone()),
                            (&[Z], cd1.clone()),
                            (&[], -(c + d)),
                        ],
                    ),
                ),
                relation(
                    "t0_zi",
                    &[T0, Zi],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[T0, Zi][..], one.clone()),
                            (&[Z, T0], -p.q_pow(-1)),
                            (&[Z], -(&cd1 * &p.q_pow(-1))),
                            (&[], (c + d) * p.q_pow(-1)),
                        ],
                    ),
                ),
            ])
        }
        AlgebraId::DahaPbw => {
            let alg = AlgebraId::DahaPbw;
            let e4 = p.abcd();
            let one_m_q = &one - q;
            Ok(vec![
                cancel(alg, "z_zi", Z, Zi),
                cancel(alg, "zi_z", Zi, Z),
                cancel(alg, "y_yi", Y, Yi),
                cancel(alg, "yi_y", Yi, Y),
                t1_quad(alg),
                t1_z(alg),
                t1_zi(alg),
                relation(
                    "t1_y",
                    &[T1, Y],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[T1, Y][..], one.clone()),
                            (&[Yi, T1], -(&e4 * &p.q_pow(-1))),
                            (&[Y], ab1.clone()),
                            (&[], -(&ab * &cd1)),
                        ],
                    ),
                ),
                relation(
                    "t1_yi",
                    &[T1, Yi],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[T1, Yi][..], one.clone()),
                            (&[Y, T1], -(q / &e4)),
                            (&[Y], -(q * &ab1 / &e4)),
                            (&[], q * &cd1 / &cd),
                        ],
                    ),
                ),
                relation(
                    "y_z",
                    &[Y, Z],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[Y, Z][..], one.clone()),
                            (&[Z, Y], -q.clone()),
                            (&[Zi, Yi, T1], -(&ab1 * &cd)),
                            (&[Yi, T1], (a + b) * &cd),
                            (&[Zi, T1], cd1.clone()),
                            (&[Zi], &one_m_q * &ab1 * &cd1),
                            (&[T1], -(c + d)),
                            (&[], -(&one_m_q * &(a + b) * &cd1)),
                        ],
                    ),
                ),
                relation(
                    "y_zi",
                    &[Y, Zi],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[Y, Zi][..], one.clone()),
                            (&[Zi, Y], -p.q_pow(-1)),
                            (&[Zi, Yi, T1], &ab1 * &cd * &p.q_pow(-2)),
                            (&[Yi, T1], -((a + b) * &cd * p.q_pow(-2))),
                            (&[Zi, T1], -(&cd1 * &p.q_pow(-1))),
                            (&[T1], (c + d) * p.q_pow(-1)),
                        ],
                    ),
                ),
                relation(
                    "yi_z",
                    &[Yi, Z],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[Yi, Z][..], one.clone()),
                            (&[Z, Yi], -p.q_pow(-1)),
                            (&[Zi, Yi, T1], q * &ab1 / &ab),
                            (&[Yi, T1], -((a + b) / &ab)),
                            (&[Zi, T1], -(q * &cd1 / &e4)),
                            (&[Zi], -(q * &one_m_q * &ab1 * &cd1 / &e4)),
                            (&[T1], (c + d) / &e4),
                            (&[], &one_m_q * &ab1 * &(c + d) / &e4),
                        ],
                    ),
                ),
                relation(
                    "yi_zi",
                    &[Yi, Zi],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[Yi, Zi][..], one.clone()),
                            (&[Zi, Yi], -q.clone()),
                            (&[Zi, Yi, T1], -(q * &ab1 / &ab)),
                            (&[Yi, T1], (a + b) / &ab),
                            (&[Zi, T1], p.q_pow(2) * &cd1 / &e4),
                            (&[T1], -(q * &(c + d) / &e4)),
                        ],
                    ),
                ),
            ])
        }
        AlgebraId::Aw3Q0 => {
            let alg = AlgebraId::Aw3Q0;
            let k = crate::coeff::aw3_constants(p);
            let qq = q + &p.q_pow(-1);
            let casimir = casimir_element(alg, p)?.sub(&NCPoly::constant(alg, k.q0.clone()))?;
            Ok(vec![
                relation(
                    "zhedanov_k1",
                    &[K1, K1, K0],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[K1, K0, K1][..], qq.clone()),
                            (&[K1, K1, K0], -one.clone()),
                            (&[K0, K1, K1], -one.clone()),
                            (&[K1], -k.b.clone()),
                            (&[K0], -k.c0.clone()),
                            (&[], -k.d0.clone()),
                        ],
                    ),
                ),
                relation(
                    "zhedanov_k0",
                    &[K1, K0, K0],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[K0, K1, K0][..], qq),
                            (&[K0, K0, K1], -one.clone()),
                            (&[K1, K0, K0], -one.clone()),
                            (&[K0], -k.b.clone()),
                            (&[K1], -k.c1.clone()),
                            (&[], -k.d1.clone()),
                        ],
                    ),
                ),
                relation("casimir", &[K1, K0, K1, K0], casimir),
            ])
        }
        AlgebraId::Awq => {
            let alg = AlgebraId::Awq;
            let k = crate::coeff::aw3_constants(p);
            let x = crate::coeff::ext_constants(p);
            let qq = q + &p.q_pow(-1);
            let b1_eff = &k.b + &(&x.e * &ab); // B + E ab
            let casimir = casimir_element(alg, p)?.sub(&NCPoly::constant(alg, k.q0.clone()))?;
            Ok(vec![
                relation(
                    "t1_k0_commute",
                    &[T1, K0],
                    NCPoly::from_terms(alg, &[(&[T1, K0][..], one.clone()), (&[K0, T1], -one.clone())]),
                ),
                relation(
                    "t1_k1_commute",
                    &[T1, K1],
                    NCPoly::from_terms(alg, &[(&[T1, K1][..], one.clone()), (&[K1, T1], -one.clone())]),
                ),
                t1_quad(alg),
                relation(
                    "extended_k1",
                    &[K1, K1, K0],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[K1, K0, K1][..], qq.clone()),
                            (&[K1, K1, K0], -one.clone()),
                            (&[K0, K1, K1], -one.clone()),
                            (&[K1], -b1_eff.clone()),
                            (&[K0], -k.c0.clone()),
                            (&[K1, T1], -x.e.clone()),
                            (&[T1], -x.f0.clone()),
                            (&[], -(&k.d0 + &(&x.f0 * &ab))),
                        ],
                    ),
                ),
                relation(
                    "extended_k0",
                    &[K1, K0, K0],
                    NCPoly::from_terms(
                        alg,
                        &[
                            (&[K0, K1, K0][..], qq),
                            (&[K0, K0, K1], -one.clone()),
                            (&[K1, K0, K0], -one.clone()),
                            (&[K0], -b1_eff),
                            (&[K1], -k.c1.clone()),
                            (&[K0, T1], -x.e.clone()),
                            (&[T1], -x.f1.clone()),
                            (&[], -(&k.d1 + &(&x.f1 * &ab))),
                        ],
                    ),
                ),
                relation("casimir", &[K1, K0, K1, K0], casimir),
            ])
        }
    }
}

/// One oriented rewrite rule: the pattern word rewrites to the listed terms.
#[derive(Debug, Clone)]
pub struct RewriteRule {
    pub name: &'static str,
    pub pattern: Vec<Gen>,
    pub rhs: Vec<(Word, Coef)>,
}

impl RewriteRule {
    /// Orients a defining relation into a rule by solving it for the
    /// pattern word: `pattern -> pattern - poly / coeff(pattern)`.
    fn from_relation(rel: &NamedRelation) -> Self {
        let pattern_word = Word(rel.pattern.clone());
        let c = rel.poly.coeff(&pattern_word);
        assert!(!c.is_zero());
        let mut rhs_poly = NCPoly::from_word(rel.poly.algebra(), pattern_word, Coef::one());
        rhs_poly = rhs_poly.sub(&rel.poly.scale(&c.recip())).expect("same algebra");
        RewriteRule {
            name: rel.name,
            pattern: rel.pattern.clone(),
            rhs: rhs_poly.terms().map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }
}

/// An ordered list of rewrite rules for one algebra. Reduction repeatedly
/// rewrites the leftmost matching pattern (rules tried in fixed order at
/// each position) of the canonically smallest reducible term, which makes
/// the run deterministic. Termination comes from the inversion-counting
/// orders of the underlying presentations; a generous step budget guards
/// against rule-table bugs.
pub struct RewriteSystem {
    algebra: AlgebraId,
    rules: Vec<RewriteRule>,
}

impl RewriteSystem {
    pub fn for_algebra(algebra: AlgebraId, p: &ParamPack) -> Result<Self> {
        let rules = relation_polys(algebra, p)?.iter().map(RewriteRule::from_relation).collect();
        Ok(RewriteSystem { algebra, rules })
    }

    #[cfg(test)]
    fn from_rules(algebra: AlgebraId, rules: Vec<RewriteRule>) -> Self {
        RewriteSystem { algebra, rules }
    }

    pub fn algebra(&self) -> AlgebraId {
        self.algebra
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// Leftmost redex: smallest position, then first matching rule.
    fn find_redex(&self, w: &Word) -> Option<(usize, usize)> {
        for pos in 0..w.len() {
            for (ri, rule) in self.rules.iter().enumerate() {
                if w.0[pos..].starts_with(&rule.pattern) {
                    return Some((pos, ri));
                }
            }
        }
        None
    }

    /// Applies one rewrite step to a single word, if any rule matches.
    pub fn rewrite_once(&self, w: &Word) -> Option<Vec<(Word, Coef)>> {
        let (pos, ri) = self.find_redex(w)?;
        let rule = &self.rules[ri];
        Some(
            rule.rhs
                .iter()
                .map(|(repl, c)| (Word::concat3(&w.0[..pos], &repl.0, &w.0[pos + rule.pattern.len()..]), c.clone()))
                .collect(),
        )
    }

    /// Reduces a polynomial to its fixed point under the rules. Terms are
    /// merged after every step, so cancellations keep intermediate results
    /// small.
    pub fn reduce(&self, x: &NCPoly) -> Result<NCPoly> {
        if x.algebra() != self.algebra {
            return Err(Error::AlgebraMismatch { expected: self.algebra, got: x.algebra() });
        }
        let input_len = x.terms().map(|(w, _)| w.len()).max().unwrap_or(0) as u64;
        let budget = 10_000 * (input_len + 1) * (input_len + 1);
        let mut work = x.clone();
        let mut steps = 0u64;
        let mut normal: std::collections::HashSet<Word> = std::collections::HashSet::new();
        loop {
            let redex = work
                .terms()
                .filter(|(w, _)| !normal.contains(*w))
                .find_map(|(w, _)| match self.find_redex(w) {
                    Some((pos, ri)) => Some((w.clone(), Some((pos, ri)))),
                    None => Some((w.clone(), None)),
                });
            match redex {
                None => return Ok(work),
                Some((w, None)) => {
                    normal.insert(w);
                }
                Some((w, Some((pos, ri)))) => {
                    steps += 1;
                    if steps > budget {
                        return Err(Error::NonTermination(format!(
                            "{} steps exceeded reducing over {}",
                            budget,
                            self.algebra.name()
                        )));
                    }
                    let c = work.coeff(&w);
                    work.add_term(w.clone(), -c.clone());
                    let rule = &self.rules[ri];
                    for (repl, rc) in &rule.rhs {
                        let nw = Word::concat3(&w.0[..pos], &repl.0, &w.0[pos + rule.pattern.len()..]);
                        work.add_term(nw, &c * rc);
                    }
                }
            }
        }
    }

    /// Reduces a single word.
    pub fn reduce_word(&self, w: &Word) -> Result<NCPoly> {
        self.reduce(&NCPoly::from_word(self.algebra, w.clone(), Coef::one()))
    }
}

/// True iff every generator commutes with `c` modulo the relations.
pub fn is_central(c: &NCPoly, sys: &RewriteSystem) -> Result<bool> {
    for &g in sys.algebra().alphabet() {
        let gp = NCPoly::gen(sys.algebra(), g);
        let comm = c.commutator(&gp)?;
        if !sys.reduce(&comm)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rewrites each generator of `x` by `map` inside the `target` algebra,
/// extended multiplicatively over words and linearly over terms.
pub fn substitute_generators(
    x: &NCPoly,
    target: AlgebraId,
    map: &dyn Fn(Gen) -> NCPoly,
) -> Result<NCPoly> {
    let mut out = NCPoly::zero(target);
    for (w, c) in x.terms() {
        let mut img = NCPoly::constant(target, c.clone());
        for &g in &w.0 {
            let gi = map(g);
            if gi.algebra() != target {
                return Err(Error::AlgebraMismatch { expected: target, got: gi.algebra() });
            }
            img = img.mul(&gi)?;
        }
        out = out.add(&img)?;
    }
    Ok(out)
}

/// The embedding of the central extension into the PBW presentation:
/// `K0 -> Y + q^-1 abcd Y^-1`, `K1 -> Z + Z^-1`, `T1 -> T1`.
pub fn embed_awq(x: &NCPoly, p: &ParamPack) -> Result<NCPoly> {
    if x.algebra() != AlgebraId::Awq {
        return Err(Error::AlgebraMismatch { expected: AlgebraId::Awq, got: x.algebra() });
    }
    let target = AlgebraId::DahaPbw;
    let scale = p.abcd() * p.q_pow(-1);
    substitute_generators(x, target, &move |g| match g {
        Gen::K0 => NCPoly::from_terms(
            target,
            &[(&[Gen::Y][..], Coef::one()), (&[Gen::Yi], scale.clone())],
        ),
        Gen::K1 => NCPoly::from_terms(
            target,
            &[(&[Gen::Z][..], Coef::one()), (&[Gen::Zi], Coef::one())],
        ),
        Gen::T1 => NCPoly::gen(target, Gen::T1),
        other => unreachable!("generator {other} does not occur over the extension"),
    })
}

/// True iff `w` lies in the spanning set the reduction targets.
pub fn is_spanning_word(alg: AlgebraId, w: &Word) -> bool {
    match alg {
        // K0^n (K1 K0)^l K1^m with l in {0, 1}, i.e. at most one inversion
        AlgebraId::Aw3Q0 => rho(w) <= 1,
        // the same skeleton followed by at most one trailing T1
        AlgebraId::Awq => {
            let t1_count = w.0.iter().filter(|&&g| g == Gen::T1).count();
            let body = match t1_count {
                0 => &w.0[..],
                1 if w.0.last() == Some(&Gen::T1) => &w.0[..w.len() - 1],
                _ => return false,
            };
            rho(&Word(body.to_vec())) <= 1
        }
        // a uniform Z or Z^-1 run, then an alternating word in T1, T0
        AlgebraId::DahaT => {
            let split = w.0.iter().position(|g| matches!(g, Gen::T0 | Gen::T1)).unwrap_or(w.len());
            let (zrun, trun) = w.0.split_at(split);
            let uniform = zrun.windows(2).all(|p| p[0] == p[1]);
            let alternating = trun
                .windows(2)
                .all(|p| matches!(p, [Gen::T0, Gen::T1] | [Gen::T1, Gen::T0]));
            let no_late_z = trun.iter().all(|g| matches!(g, Gen::T0 | Gen::T1));
            uniform && alternating && no_late_z
        }
        // Z^m Y^n T1^i: uniform Z-run, uniform Y-run, at most one final T1
        AlgebraId::DahaPbw => {
            let mut phase = 0; // 0 = Z-run, 1 = Y-run, 2 = saw T1
            let mut zsym = None;
            let mut ysym = None;
            for &g in &w.0 {
                match g {
                    Gen::Z | Gen::Zi => {
                        if phase > 0 || *zsym.get_or_insert(g) != g {
                            return false;
                        }
                    }
                    Gen::Y | Gen::Yi => {
                        if phase > 1 || *ysym.get_or_insert(g) != g {
                            return false;
                        }
                        phase = 1;
                    }
                    Gen::T1 => {
                        if phase == 2 {
                            return false;
                        }
                        phase = 2;
                    }
                    _ => return false,
                }
            }
            true
        }
    }
}

/// All words over the algebra's alphabet with length at most `max_len`,
/// shortest first, lexicographic within a length.
pub fn enumerate_words(alg: AlgebraId, max_len: usize) -> Vec<Word> {
    let alphabet = alg.alphabet();
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for &g in alphabet {
                let mut v = w.0.clone();
                v.push(g);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{aw3_constants, coef_frac, coef_int, random_pack};
    use rand::{Rng, SeedableRng};

    fn pack() -> ParamPack {
        ParamPack::new(coef_frac(1, 2), coef_int(2), coef_int(3), coef_int(5), coef_int(7), 16, false).unwrap()
    }

    #[test]
    fn nc_ops_basics() {
        let alg = AlgebraId::Aw3Q0;
        let p = pack();
        let k0 = NCPoly::gen(alg, Gen::K0);
        let k1 = NCPoly::gen(alg, Gen::K1);
        // q-commutator of an element with itself is (s - s^-1) x^2
        let qc = k0.q_commutator(&k0, &p).unwrap();
        let sq = k0.mul(&k0).unwrap();
        assert_eq!(qc, sq.scale(&(p.s() - &p.s_pow(-1))));
        // commutator of distinct generators is a two-word difference
        let comm = k0.commutator(&k1).unwrap();
        assert_eq!(comm.num_terms(), 2);
        // distributivity
        let sum = k0.add(&k1).unwrap();
        let prod = sum.mul(&k0).unwrap();
        let expect = NCPoly::from_terms(
            alg,
            &[(&[Gen::K0, Gen::K0][..], Coef::one()), (&[Gen::K1, Gen::K0], Coef::one())],
        );
        assert_eq!(prod, expect);
    }

    #[test]
    fn algebra_mismatch_is_rejected() {
        let x = NCPoly::gen(AlgebraId::Aw3Q0, Gen::K0);
        let y = NCPoly::gen(AlgebraId::DahaT, Gen::T1);
        assert!(matches!(x.add(&y), Err(Error::AlgebraMismatch { .. })));
    }

    #[test]
    fn nested_q_commutator_recovers_cubic_relation_shape() {
        // [K1, [K0, K1]_q]_q = (q + q^-1) K1 K0 K1 - K1^2 K0 - K0 K1^2
        // as an identity of free polynomials
        let alg = AlgebraId::Aw3Q0;
        let p = pack();
        let k0 = NCPoly::gen(alg, Gen::K0);
        let k1 = NCPoly::gen(alg, Gen::K1);
        let inner = k0.q_commutator(&k1, &p).unwrap();
        let lhs = k1.q_commutator(&inner, &p).unwrap();
        let qq = p.q() + &p.q_pow(-1);
        let expect = NCPoly::from_terms(
            alg,
            &[
                (&[Gen::K1, Gen::K0, Gen::K1][..], qq),
                (&[Gen::K1, Gen::K1, Gen::K0], -Coef::one()),
                (&[Gen::K0, Gen::K1, Gen::K1], -Coef::one()),
            ],
        );
        assert_eq!(lhs, expect);
    }

    #[test]
    fn reduce_cubic_pattern() {
        // K1 K1 K0 rewrites to the five-term right-hand side
        let p = pack();
        let sys = RewriteSystem::for_algebra(AlgebraId::Aw3Q0, &p).unwrap();
        let k = aw3_constants(&p);
        let qq = p.q() + &p.q_pow(-1);
        let got = sys.reduce_word(&Word(vec![Gen::K1, Gen::K1, Gen::K0])).unwrap();
        let expect = NCPoly::from_terms(
            AlgebraId::Aw3Q0,
            &[
                (&[Gen::K1, Gen::K0, Gen::K1][..], qq),
                (&[Gen::K0, Gen::K1, Gen::K1], -Coef::one()),
                (&[Gen::K1], -k.b.clone()),
                (&[Gen::K0], -k.c0.clone()),
                (&[], -k.d0.clone()),
            ],
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn reduce_t1z_pattern() {
        let p = pack();
        let sys = RewriteSystem::for_algebra(AlgebraId::DahaT, &p).unwrap();
        let got = sys.reduce_word(&Word(vec![Gen::T1, Gen::Z])).unwrap();
        let expect = NCPoly::from_terms(
            AlgebraId::DahaT,
            &[
                (&[Gen::Zi, Gen::T1][..], Coef::one()),
                (&[Gen::Zi], p.ab() + Coef::one()),
                (&[], -(p.a() + p.b())),
            ],
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn basis_words_are_fixed_points() {
        let p = pack();
        for alg in [AlgebraId::Aw3Q0, AlgebraId::Awq, AlgebraId::DahaT, AlgebraId::DahaPbw] {
            let sys = RewriteSystem::for_algebra(alg, &p).unwrap();
            for w in enumerate_words(alg, 3) {
                if is_spanning_word(alg, &w) {
                    let red = sys.reduce_word(&w).unwrap();
                    assert_eq!(red, NCPoly::from_word(alg, w.clone(), Coef::one()), "{} word {w}", alg.name());
                }
            }
        }
    }

    #[test]
    fn reduce_lands_in_spanning_set() {
        let p = pack();
        for alg in [AlgebraId::Aw3Q0, AlgebraId::Awq, AlgebraId::DahaT, AlgebraId::DahaPbw] {
            let sys = RewriteSystem::for_algebra(alg, &p).unwrap();
            for w in enumerate_words(alg, 4) {
                let red = sys.reduce_word(&w).unwrap();
                for (nw, _) in red.terms() {
                    assert!(is_spanning_word(alg, nw), "{}: {w} reduced to non-basis word {nw}", alg.name());
                }
            }
        }
    }

    #[test]
    fn casimir_reduces_to_its_scalar() {
        let p = pack();
        let k = aw3_constants(&p);
        for alg in [AlgebraId::Aw3Q0, AlgebraId::Awq] {
            let sys = RewriteSystem::for_algebra(alg, &p).unwrap();
            let q = casimir_element(alg, &p).unwrap();
            assert_eq!(sys.reduce(&q).unwrap(), NCPoly::constant(alg, k.q0.clone()));
        }
    }

    #[test]
    fn casimir_leading_words() {
        let p = pack();
        let q = casimir_element(AlgebraId::Aw3Q0, &p).unwrap();
        assert_eq!(q.coeff(&Word(vec![Gen::K1, Gen::K0, Gen::K1, Gen::K0])), Coef::one());
        let x = crate::coeff::ext_constants(&p);
        let qt = casimir_element(AlgebraId::Awq, &p).unwrap();
        // contains G*(T1 + ab)
        assert_eq!(qt.coeff(&Word(vec![Gen::T1])), x.g);
        assert_eq!(qt.coeff(&Word::empty()), &x.g * &p.ab());
    }

    #[test]
    fn casimir_is_central_in_extension() {
        let p = pack();
        let sys = RewriteSystem::for_algebra(AlgebraId::Awq, &p).unwrap();
        let qt = casimir_element(AlgebraId::Awq, &p).unwrap();
        assert!(is_central(&qt, &sys).unwrap());
        // a bare generator is not central
        let k0 = NCPoly::gen(AlgebraId::Awq, Gen::K0);
        assert!(!is_central(&k0, &sys).unwrap());
        // scalars are central
        let one = NCPoly::one(AlgebraId::Awq);
        assert!(is_central(&one, &sys).unwrap());
    }

    #[test]
    fn aw3q0_casimir_is_central() {
        let p = pack();
        let sys = RewriteSystem::for_algebra(AlgebraId::Aw3Q0, &p).unwrap();
        let q = casimir_element(AlgebraId::Aw3Q0, &p).unwrap();
        assert!(is_central(&q, &sys).unwrap());
        assert!(!is_central(&NCPoly::gen(AlgebraId::Aw3Q0, Gen::K0), &sys).unwrap());
    }

    #[test]
    fn embedding_generator_images() {
        let p = pack();
        let alg = AlgebraId::Awq;
        let k1 = NCPoly::gen(alg, Gen::K1);
        let img = embed_awq(&k1, &p).unwrap();
        let expect = NCPoly::from_terms(
            AlgebraId::DahaPbw,
            &[(&[Gen::Z][..], Coef::one()), (&[Gen::Zi], Coef::one())],
        );
        assert_eq!(img, expect);
        let k0 = NCPoly::gen(alg, Gen::K0);
        let img = embed_awq(&k0, &p).unwrap();
        let expect = NCPoly::from_terms(
            AlgebraId::DahaPbw,
            &[(&[Gen::Y][..], Coef::one()), (&[Gen::Yi], p.abcd() * p.q_pow(-1))],
        );
        assert_eq!(img, expect);
        // bilinearity: K0 K1 expands to four words
        let img = embed_awq(&k0.mul(&k1).unwrap(), &p).unwrap();
        assert_eq!(img.num_terms(), 4);
    }

    #[test]
    fn rewrite_steps_decrease_inversion_measure() {
        // every replacement word of a two-generator reduction step has a
        // strictly smaller (inversions, length) pair
        let p = pack();
        let sys = RewriteSystem::for_algebra(AlgebraId::Aw3Q0, &p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(2..=8);
            let w = Word((0..len).map(|_| if rng.gen::<bool>() { Gen::K0 } else { Gen::K1 }).collect());
            if let Some(terms) = sys.rewrite_once(&w) {
                let before = (rho(&w), w.len());
                for (nw, _) in terms {
                    let after = (rho(&nw), nw.len());
                    assert!(after < before, "step {w} -> {nw} did not decrease ({before:?} -> {after:?})");
                }
            } else {
                assert!(is_spanning_word(AlgebraId::Aw3Q0, &w));
            }
        }
    }

    fn random_nc(rng: &mut impl Rng, alg: AlgebraId, max_len: usize, max_terms: usize) -> NCPoly {
        let alphabet = alg.alphabet();
        let mut out = NCPoly::zero(alg);
        let terms = rng.gen_range(1..=max_terms);
        for _ in 0..terms {
            let len = rng.gen_range(0..=max_len);
            let w = Word((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect());
            let c = coef_frac(rng.gen_range(-9..=9), rng.gen_range(1..=9));
            out.add_term(w, c);
        }
        out
    }

    #[test]
    fn reduce_is_idempotent_and_multiplicative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for alg in [AlgebraId::Aw3Q0, AlgebraId::Awq, AlgebraId::DahaT, AlgebraId::DahaPbw] {
            let p = random_pack(&mut rng, 16);
            let sys = RewriteSystem::for_algebra(alg, &p).unwrap();
            for _ in 0..6 {
                let x = random_nc(&mut rng, alg, 3, 3);
                let y = random_nc(&mut rng, alg, 3, 3);
                let rx = sys.reduce(&x).unwrap();
                assert_eq!(sys.reduce(&rx).unwrap(), rx, "{}: not idempotent", alg.name());
                let direct = sys.reduce(&x.mul(&y).unwrap()).unwrap();
                let staged = sys.reduce(&rx.mul(&sys.reduce(&y).unwrap()).unwrap()).unwrap();
                assert_eq!(direct, staged, "{}: not multiplicative", alg.name());
            }
        }
    }

    #[test]
    fn nontermination_guard_fires() {
        // a deliberately cyclic rule: K0 K1 -> K0 K1
        let bad = RewriteRule {
            name: "loop",
            pattern: vec![Gen::K0, Gen::K1],
            rhs: vec![(Word(vec![Gen::K0, Gen::K1]), Coef::one())],
        };
        let sys = RewriteSystem::from_rules(AlgebraId::Aw3Q0, vec![bad]);
        let err = sys.reduce_word(&Word(vec![Gen::K0, Gen::K1])).unwrap_err();
        assert!(matches!(err, Error::NonTermination(_)));
    }

    #[test]
    fn spanning_word_predicates() {
        use Gen::*;
        let ok = |alg, w: &[Gen]| is_spanning_word(alg, &Word(w.to_vec()));
        assert!(ok(AlgebraId::Aw3Q0, &[K0, K0, K1, K0, K1, K1]));
        assert!(!ok(AlgebraId::Aw3Q0, &[K1, K1, K0]));
        assert!(ok(AlgebraId::Awq, &[K0, K1, K0, K1, T1]));
        assert!(!ok(AlgebraId::Awq, &[K0, T1, K1]));
        assert!(!ok(AlgebraId::Awq, &[K0, T1, T1]));
        assert!(ok(AlgebraId::DahaT, &[Z, Z, T0, T1, T0]));
        assert!(!ok(AlgebraId::DahaT, &[Z, Zi]));
        assert!(!ok(AlgebraId::DahaT, &[T0, T0]));
        assert!(!ok(AlgebraId::DahaT, &[T0, Z]));
        assert!(ok(AlgebraId::DahaPbw, &[Zi, Zi, Y, Y, T1]));
        assert!(!ok(AlgebraId::DahaPbw, &[Y, Z]));
        assert!(!ok(AlgebraId::DahaPbw, &[Z, Y, Yi]));
        assert!(!ok(AlgebraId::DahaPbw, &[T1, Z]));
        assert!(ok(AlgebraId::DahaPbw, &[T1]));
    }

    #[test]
    fn word_parsing() {
        let w = Word::parse("K1,K0,K0", AlgebraId::Aw3Q0).unwrap();
        assert_eq!(w, Word(vec![Gen::K1, Gen::K0, Gen::K0]));
        assert!(Word::parse("T1,Z", AlgebraId::Aw3Q0).is_err());
        assert_eq!(Word::parse("", AlgebraId::DahaT).unwrap(), Word::empty());
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_words(AlgebraId::Aw3Q0, 5).len(), 1 + 2 + 4 + 8 + 16 + 32);
        assert_eq!(enumerate_words(AlgebraId::DahaT, 3).len(), 1 + 4 + 16 + 64);
        assert_eq!(enumerate_words(AlgebraId::DahaPbw, 2).len(), 1 + 5 + 25);
    }
}
