//! Certifies rate sequences against a λ grid and checks the relaxed
//! conditions on a coefficient matrix.
//!
//! ```text
//! cargo run --example alpha_series
//! ```

use pmt::series::{
    certify_alpha_series, check_relaxed_hypotheses, kannan_rate_terms, Delta, DeltaMatrix, RateSequence, DEFAULT_GRID,
};

fn main() -> pmt::Result<()> {
    // Harmonic terms 1/(i+1): the averages drop below 1/2 after a few terms.
    let harmonic = RateSequence::new((1..=1000).map(|i| 1.0 / (i as f64 + 1.0)).collect())?;
    let cert = certify_alpha_series(&harmonic, &DEFAULT_GRID)?;
    println!("harmonic: {:?} λ={} n(λ)={} ({})", cert.status, cert.lambda, cert.n_lambda, cert.note);

    // Constant 0.99 never settles under any grid value.
    let flat = RateSequence::new(vec![0.99; 1000])?;
    let cert = certify_alpha_series(&flat, &DEFAULT_GRID)?;
    println!("flat 0.99: {:?} λ={} n(λ)={}", cert.status, cert.lambda, cert.n_lambda);

    // δ_i = 1/16^i with s = 1/2 and the 2^s factor.
    let deltas: Vec<Delta> = (1..=50).map(|i| Delta::Float(16f64.powi(-i))).collect();
    let seq = kannan_rate_terms(&deltas, 0.5, true)?;
    println!("first rate terms: {:?}", &seq.terms()[..4]);
    let cert = certify_alpha_series(&seq, &[std::f64::consts::FRAC_1_SQRT_2])?;
    println!("geometric: {:?} λ={:.6} n(λ)={}", cert.status, cert.lambda, cert.n_lambda);

    // Relaxed conditions on δ_{i,j} = 1/4^max(i,j).
    let m = DeltaMatrix::new("1/4^max(i,j)", |i, j| 0.25f64.powi(i.max(j) as i32));
    let rep = check_relaxed_hypotheses(&m, 0.5, 200)?;
    println!(
        "relaxed: limsup={:.3e} ok={} ΣC_n {:?} partial sum {:.6}",
        rep.worst_limsup, rep.limsup_ok, rep.cn_summable, rep.cn_partial_sum
    );
    println!("C_1..C_4 = {:?}", &rep.cn[..4]);
    Ok(())
}
