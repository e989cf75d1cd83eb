//! Small hand-checkable instances used by tests, examples and the CLI.

use crate::instance::{Instance, InstanceBuilder};

/// Two buses joined by one existing line (id 0, susceptance 1, 30 MW) and
/// one duplicate candidate (id 1, investment 10). A 100 MW generator at
/// bus 0 with unit cost serves 50 MW at bus 1.
pub fn t2() -> Instance {
    let mut b = InstanceBuilder::new("t2", 2);
    b.generator(0, 1.0);
    let j0 = b.existing(0, 1, 1.0, 30.0);
    b.candidate(0, 1, 1.0, 30.0, 10.0, Some(j0));
    b.scenario(1.0, vec![0.0, 50.0], vec![0.0], vec![100.0]);
    b.build().expect("t2 fixture is valid")
}

/// Corridors of the six-bus fixture: `(from, to, reactance, capacity MW)`.
const G6_CORRIDORS: [(usize, usize, f64, f64); 7] = [
    (0, 1, 0.40, 100.0),
    (0, 3, 0.60, 80.0),
    (0, 4, 0.20, 100.0),
    (1, 2, 0.20, 100.0),
    (1, 3, 0.40, 100.0),
    (2, 4, 0.20, 100.0),
    (1, 5, 0.30, 100.0),
];

/// Garver-style six-bus system. Bus 5 hosts cheap generation behind a
/// single 100 MW line, so the existing network alone cannot serve the
/// 760 MW load. Every corridor carries one existing line and two duplicate
/// candidates costing `10⁴/3 ×` reactance (14 candidates).
pub fn g6() -> Instance {
    g6_with(&[2, 2, 2, 2, 2, 2, 2], "g6")
}

/// [`g6`] with 12 candidates: none on corridor 0–3.
pub fn g6_restricted() -> Instance {
    g6_with(&[2, 0, 2, 2, 2, 2, 2], "g6-restricted")
}

fn g6_with(copies: &[usize; 7], name: &str) -> Instance {
    let mut b = InstanceBuilder::new(name, 6);
    b.generator(0, 30.0);
    b.generator(2, 20.0);
    b.generator(5, 10.0);
    let existing: Vec<_> = G6_CORRIDORS.iter().map(|&(f, t, x, cap)| b.existing(f, t, 1.0 / x, cap)).collect();
    for ((&(_, _, x, _), &j), &n) in G6_CORRIDORS.iter().zip(&existing).zip(copies) {
        for _ in 0..n {
            let l = b.build_ref().line(j).expect("existing").clone();
            b.candidate(l.from_bus, l.to_bus, l.susceptance, l.capacity, 1e4 / 3.0 * x, Some(j));
        }
    }
    b.scenario(1.0, vec![80.0, 240.0, 40.0, 160.0, 240.0, 0.0], vec![0.0; 3], vec![150.0, 360.0, 600.0]);
    b.build().expect("g6 fixture is valid")
}
