use std::collections::HashMap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use awdaha_core::coeff::{coef_frac, coef_int, Coef, ParamPack};
use awdaha_core::laurent::LaurentPoly;
use awdaha_core::ncalg::{AlgebraId, Gen, NCPoly, RewriteSystem, Word};
use awdaha_core::operators::{full_basis, ActionCache};
use awdaha_core::verify::RepMap;

struct Prof {
    reduce_time: Duration,
    img_time: Duration,
    sum_time: Duration,
    dfs_time: Duration,
    nf_terms_total: usize,
    nodes: usize,
}

fn main() {
    let pack = ParamPack::new(coef_frac(1, 2), coef_int(2), coef_int(3), coef_int(5), coef_int(7), 40, false).unwrap();
    let alg = AlgebraId::DahaPbw;
    let sys = RewriteSystem::for_algebra(alg, &pack).unwrap();
    let rep = RepMap::for_algebra(alg);
    let cache = ActionCache::new(&pack);
    let basis = full_basis(12);
    let mut nf_images: HashMap<Word, Rc<Vec<LaurentPoly>>> = HashMap::new();
    let mut step_memo: HashMap<(Gen, Word), Rc<NCPoly>> = HashMap::new();
    let mut prof = Prof { reduce_time: Duration::ZERO, img_time: Duration::ZERO, sum_time: Duration::ZERO, dfs_time: Duration::ZERO, nf_terms_total: 0, nodes: 0 };

    fn dfs(
        alg: AlgebraId, sys: &RewriteSystem, rep: &RepMap, cache: &ActionCache, basis: &[LaurentPoly],
        nf_images: &mut HashMap<Word, Rc<Vec<LaurentPoly>>>, step_memo: &mut HashMap<(Gen, Word), Rc<NCPoly>>,
        word: &mut Vec<Gen>, images: &[LaurentPoly], nf: &NCPoly, max_len: usize, prof: &mut Prof,
    ) {
        prof.nodes += 1;
        prof.nf_terms_total += nf.num_terms();
        // expected-image sum
        let t = Instant::now();
        let terms: Vec<(Word, Coef)> = nf.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
        for i in 0..images.len() {
            let mut expected = LaurentPoly::zero();
            for (nw, c) in &terms {
                let imgs = if let Some(hit) = nf_images.get(nw) { Rc::clone(hit) } else {
                    let ti = Instant::now();
                    let mut v: Vec<LaurentPoly> = basis.to_vec();
                    for &g in nw.0.iter().rev() {
                        for img in &mut v { *img = cache.apply_atom(rep.gen_atom(g), img).unwrap(); }
                    }
                    let rc = Rc::new(v);
                    nf_images.insert(nw.clone(), Rc::clone(&rc));
                    prof.img_time += ti.elapsed();
                    rc
                };
                expected = expected.add(&imgs[i].scale(c));
            }
            assert_eq!(&expected, &images[i]);
        }
        prof.sum_time += t.elapsed();

        if word.len() == max_len { return; }
        for &g in alg.alphabet() {
            let t = Instant::now();
            let mut next_images = Vec::with_capacity(images.len());
            for img in images { next_images.push(cache.apply_atom(rep.gen_atom(g), img).unwrap()); }
            prof.dfs_time += t.elapsed();
            let t = Instant::now();
            let mut next_nf = NCPoly::zero(alg);
            for (nw, c) in nf.terms().map(|(w, c)| (w.clone(), c.clone())).collect::<Vec<_>>() {
                let step = if let Some(hit) = step_memo.get(&(g, nw.clone())) { Rc::clone(hit) } else {
                    let mut ext = vec![g]; ext.extend_from_slice(&nw.0);
                    let rc = Rc::new(sys.reduce(&NCPoly::from_word(alg, Word(ext), Coef::from_integer(1.into()))).unwrap());
                    step_memo.insert((g, nw), Rc::clone(&rc)); rc
                };
                next_nf = next_nf.add(&step.scale(&c)).unwrap();
            }
            prof.reduce_time += t.elapsed();
            word.insert(0, g);
            dfs(alg, sys, rep, cache, basis, nf_images, step_memo, word, &next_images, &next_nf, max_len, prof);
            word.remove(0);
        }
    }

    let t = Instant::now();
    let mut word = Vec::new();
    dfs(alg, &sys, &rep, &cache, &basis, &mut nf_images, &mut step_memo, &mut word, &basis.clone(), &NCPoly::one(alg), 5, &mut prof);
    println!("total {:?}  nodes {}  avg nf terms {:.1}", t.elapsed(), prof.nodes, prof.nf_terms_total as f64 / prof.nodes as f64);
    println!("reduce(step-compose) {:?}", prof.reduce_time);
    println!("nf-image computation {:?} ({} distinct)", prof.img_time, nf_images.len());
    println!("expected-sum         {:?}", prof.sum_time);
    println!("dfs atom application {:?}", prof.dfs_time);
}
