use rand::rngs::StdRng;
use rand::Rng;
use stackplan_core::stability::{Body, Contact, ContactProblem, Support};
use stackplan_core::{BlockId, SurfaceId};

/// Closed-form margin of a serial tower, written independently of the
/// library: for each contact, the combined centre of everything above,
/// shifted by the disturbance moment either way, must stay inside the
/// contact interval, and friction must carry the push.
pub fn tower_margin(bodies: &[(f64, f64, f64)], contacts: &[(f64, f64, f64)], mu: f64, eps: f64) -> f64 {
    // bodies: (weight, cx, cy) bottom first; contacts[k]: (x_a, x_b, y) under body k.
    let mut worst = if eps > 0.0 { mu - eps } else { f64::INFINITY };
    for k in 0..bodies.len() {
        let (xa, xb, y) = contacts[k];
        let w: f64 = bodies[k..].iter().map(|b| b.0).sum();
        let cx = bodies[k..].iter().map(|b| b.0 * b.1).sum::<f64>() / w;
        let arm = bodies[k..].iter().map(|b| b.0 * (b.2 - y)).sum::<f64>() / w;
        let shift = eps * arm;
        worst = worst.min(cx - shift - xa).min(xb - cx - shift);
    }
    worst
}

pub fn problem(bodies: &[(f64, f64, f64)], contacts: &[(f64, f64, f64)], mu: f64, eps: f64) -> ContactProblem {
    ContactProblem {
        bodies: bodies
            .iter()
            .enumerate()
            .map(|(i, &(w, x, y))| Body { block: BlockId(i as u16), weight: w, centroid: (x, y), fixed: false })
            .collect(),
        contacts: contacts
            .iter()
            .enumerate()
            .map(|(k, &(x_a, x_b, y))| Contact {
                lower: if k == 0 { Support::Ground(SurfaceId(0)) } else { Support::Body(k - 1) },
                upper: k,
                x_a,
                x_b,
                y,
            })
            .collect(),
        mu,
        epsilon: eps,
        slack: 1e-9,
    }
}

pub type Tower = (Vec<(f64, f64, f64)>, Vec<(f64, f64, f64)>);

/// Unit-height blocks of random width and weight, each overlapping the one
/// below; the bottom one rests on ground `[0, 4]`.
pub fn random_tower(rng: &mut StdRng) -> Tower {
    let n = rng.gen_range(1..=5);
    let mut bodies = Vec::new();
    let mut contacts = Vec::new();
    let (mut lo, mut hi) = (0.0f64, 4.0f64);
    for k in 0..n {
        let width = rng.gen_range(0.5..3.0);
        let left = rng.gen_range(lo - width + 0.05..hi - 0.05);
        let right = left + width;
        contacts.push((left.max(lo), right.min(hi), k as f64));
        bodies.push((rng.gen_range(0.2..3.0), left + width / 2.0, k as f64 + 0.5));
        lo = left;
        hi = right;
    }
    (bodies, contacts)
}

/// Four unit blocks, each shifted right by the harmonic amount, on a ground
/// interval ending at 0. Every contact is exactly at its tipping point.
pub fn harmonic_stack(eps: f64) -> ContactProblem {
    let r1 = 1.0 / 8.0;
    let r2 = r1 + 1.0 / 6.0;
    let r3 = r2 + 1.0 / 4.0;
    let r4 = r3 + 1.0 / 2.0;
    let rights = [r1, r2, r3, r4];
    let bodies: Vec<(f64, f64, f64)> =
        rights.iter().enumerate().map(|(k, r)| (1.0, r - 0.5, k as f64 + 0.5)).collect();
    let mut contacts = vec![(-7.0 / 8.0, 0.0, 0.0)];
    for k in 1..4 {
        contacts.push((rights[k] - 1.0, rights[k - 1], k as f64));
    }
    problem(&bodies, &contacts, 0.5, eps)
}

/// Table `[0, 2]`; a size-3 block A at columns 2..4 overhangs by two units;
/// a cube B of weight `wb` sits on A's left end.
pub fn counterweight(wb: f64, eps: f64) -> ContactProblem {
    let bodies = [(1.0, 3.5, 0.5), (wb, 2.5, 1.5)];
    let contacts = [(2.0, 3.0, 0.0), (2.0, 3.0, 1.0)];
    problem(&bodies, &contacts, 0.5, eps)
}
