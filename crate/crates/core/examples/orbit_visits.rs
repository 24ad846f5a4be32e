// Orbit visits of the default construction to its first nonzero target,
// with the off-visit control.

use tsl::constructor::{construct, ConstructionSpec};
use tsl::polybank::enumerate_targets;
use tsl::verify::{check_visits, negative_control};

pub fn run() -> tsl::Result<()> {
    let targets = enumerate_targets(64)?;
    let spec = ConstructionSpec {
        max_degree: 1 << 16,
        ..ConstructionSpec::dyadic_rs(0.0, 0.5)?
    };
    let c = construct(&spec, &targets)?;
    let Some(k) = c.first_admissible_target(&targets) else {
        println!("no target is built below {}", spec.max_degree);
        return Ok(());
    };
    let report = check_visits(&c, &targets, k)?;
    println!("target k = {k}, l_k = {}, radius {:.4}", report.l, report.radius);
    for v in &report.checks {
        println!("  s = {:>6}: sampled {:.3e}, tail {:.3e}", v.s, v.sampled, v.tail_bound);
    }
    if let Some(v) = negative_control(&c, &targets, k)? {
        println!("  s = {:>6} (off visit): error {:.3}", v.s, v.error);
    }
    println!("visit density estimate {:.4}", report.density_estimate.unwrap_or(0.0));
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
