// The `u_n = n^2` schedule at the critical exponent: which blocks fit under
// the truncation and what `M_2` looks like along `r = 1 - 2^{-j}`.

use tsl::constructor::{construct, ConstructionSpec, Regime, Schedule, USchedule};
use tsl::means::{critical_exponent, mean_p, Exponent};
use tsl::polybank::enumerate_targets;

pub fn run() -> tsl::Result<()> {
    let two = Exponent::Finite(2.0);
    let alpha = critical_exponent(two, 0.0)?;
    let spec = ConstructionSpec::new(alpha, 0.0, Regime::Rs, Schedule::U { u: USchedule::Squares }, 1 << 20)?;
    let c = construct(&spec, &enumerate_targets(64)?)?;
    for r in c.ledger.records() {
        println!(
            "n {:>2} [{:>8}, {:>10}] k {:?} budget {:>5} {}",
            r.n,
            r.interval.0,
            r.interval.1,
            r.k,
            r.budget,
            r.skip.as_str()
        );
    }
    for j in [12, 14, 16, 18, 19] {
        let r = 1.0 - (-(j as f64)).exp2();
        println!("j {j:>2}: M_2 = {:.6}", mean_p(&c.series, two, r, 0)?);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
