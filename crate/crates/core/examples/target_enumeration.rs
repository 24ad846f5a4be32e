// The first targets `q_k` with their levels `l_k`, and a JSON round trip.

use tsl::polybank::{enumerate_targets, TargetEnumeration};

pub fn run() -> tsl::Result<()> {
    let targets = enumerate_targets(12)?;
    for e in targets.entries() {
        let coeffs: Vec<String> = e
            .exact_coefficients()
            .iter()
            .map(|g| format!("({}{:+}i)/{}", g.a, g.b, g.c))
            .collect();
        println!("k {:>2}  l {}  deg {}  [{}]", e.k(), e.l(), e.degree(), coeffs.join(", "));
    }
    let back = TargetEnumeration::from_json(&targets.to_json()?)?;
    assert_eq!(back, targets);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
