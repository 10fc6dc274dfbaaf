use awdaha_core::coeff::{coef_frac, coef_int, ParamPack};
use awdaha_core::verify::{run_suite, SuiteConfig, SuiteName};

fn main() {
    let pack = ParamPack::new(coef_frac(1, 2), coef_int(2), coef_int(3), coef_int(5), coef_int(7), 40, false).unwrap();
    for len in [3usize, 4, 5] {
        let cfg = SuiteConfig { trials: 0, word_len: len, ..Default::default() };
        let t = std::time::Instant::now();
        let rep = run_suite(SuiteName::NormalformConsistency, &pack, &cfg).unwrap();
        println!("len={len}: {} checks, {} fails, {:?}", rep.checks.len(), rep.failures().count(), t.elapsed());
        for c in &rep.checks {
            println!("   {} {:?}", c.name, c.detail.as_ref().map(|d| d.to_string()));
        }
    }
}
