//! Majorant sequences, the strip schedule and the `||h_k|| <= gamma_k` certificate.

use fibred_flower::models;
use fibred_flower::rotation::RotationNumber;
use fibred_flower::siegel::{build_sequences, critical_epsilon, h_norm_certificate, schedule, verify_bounds, CertificateOptions};

fn main() -> fibred_flower::Result<()> {
    let seqs = build_sequences(1.0, &critical_epsilon(1.0, 30), 30)?;
    println!("tau_1..8 = {:?}", (1..=8).map(|k| seqs.tau(k)).collect::<Vec<_>>());
    let b = verify_bounds(&seqs);
    println!("theta_k bound holds: {}, gamma <= theta tau: {}", b.theta_bound.holds, b.gamma_bound.holds);

    let s = schedule(0.5, 1.0, 0.0, None, 12)?;
    println!("nu = {}, deltas {:?}", s.nu, &s.deltas[..6]);

    let f = models::twisted_quadratic(RotationNumber::golden_mean(), 12)?;
    let cert = h_norm_certificate(&f, &CertificateOptions::default())?;
    for e in &cert.entries {
        println!("k = {:>2}: ||h_k|| = {:.3e}, gamma_k = {:.3e}", e.k, e.h_norm, e.ln_gamma.exp());
    }
    println!("all pass: {}", cert.all_pass);
    Ok(())
}
