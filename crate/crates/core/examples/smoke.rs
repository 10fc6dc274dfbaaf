use awdaha_core::coeff::{coef_frac, coef_int, ParamPack};
use awdaha_core::verify::{run_suite, SuiteConfig, SuiteName};

fn main() {
    let pack = ParamPack::new(coef_frac(1, 2), coef_int(2), coef_int(3), coef_int(5), coef_int(7), 40, false).unwrap();
    let cfg = SuiteConfig { trials: 0, ..Default::default() };
    for name in SuiteName::ALL {
        let t = std::time::Instant::now();
        match run_suite(name, &pack, &cfg) {
            Ok(rep) => {
                let fails: Vec<_> = rep.failures().collect();
                println!("{:<24} {:>4} checks, {} failures, {:?}", name.name(), rep.checks.len(), fails.len(), t.elapsed());
                for f in fails.iter().take(3) {
                    println!("    FAIL {}: {}", f.name, f.detail.as_ref().map(|d| d.to_string()).unwrap_or_default());
                }
            }
            Err(e) => println!("{:<24} ERROR: {e}", name.name()),
        }
    }
}
