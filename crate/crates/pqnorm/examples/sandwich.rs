use pqnorm::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

fn main() -> Result<()> {
    let exponents = [(f64::INFINITY, 1.0), (4.0, 4.0/3.0), (2.0, 1.0), (f64::INFINITY, 2.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(0xbed);
    let mut worst_power_gap = f64::INFINITY; // cp - power (want >= 0)
    let mut worst_dual_gap = f64::INFINITY;  // dual - cp (want >= 0)
    let mut worst_dual_rel = 0.0f64;         // (dual-cp)/cp quality
    let mut worst_round = f64::INFINITY;     // ratio*round*1.05/cp (want >= 1)
    let t0 = std::time::Instant::now();
    for i in 0..50 {
        let m = 2 + (rng.random::<u32>() % 5) as usize; // 2..=6
        let n = 2 + (rng.random::<u32>() % 5) as usize;
        let a = DenseMatrix::gaussian(m, n, &mut rng);
        let (p, q) = exponents[i % 4];
        let pair = ExponentPair::new(p, q)?;
        let opts = SolveOptions { seed: i as u64, ..Default::default() };
        let (power, _) = norm_power(&a, p, q, 20, 1000 + i as u64)?;
        let cp = solve_cp(&a, &pair, &opts)?;
        let dual = solve_dual(&a, &pair, &opts)?;
        assert!(dual.valid, "instance {i}: dual invalid min_eig {}", dual.min_eig);
        let report = approx_ratio(&pair, false)?; // point-check c1c2; ratio vs certified below
        let cert = certified_hinv_lower_bound(&pair, 31, DEFAULT_TRUNCATION, 1e-9)?;
        let ratio_cert = 1.0 / (cert.rho * pair.gamma_pstar * pair.gamma_q);
        let rounded = round_best(&a, &cp, &pair, 500, 77 + i as u64)?;
        let pg = cp.value - power;
        let dg = dual.value - cp.value;
        let rr = ratio_cert * rounded.value * 1.05 / cp.value;
        worst_power_gap = worst_power_gap.min(pg);
        worst_dual_gap = worst_dual_gap.min(dg);
        worst_dual_rel = worst_dual_rel.max(dg / cp.value.max(1e-9));
        worst_round = worst_round.min(rr);
        if pg < 0.0 || dg < -1e-9 || rr < 1.0 {
            println!("BAD i={i} m={m} n={n} p={p} q={q} power={power:.6} cp={:.6} dual={:.6} round={:.6} rr={rr:.4}", cp.value, dual.value, rounded.value);
        }
        let _ = report;
    }
    println!("worst cp-power = {worst_power_gap:.3e}");
    println!("worst dual-cp  = {worst_dual_gap:.3e}");
    println!("worst dual rel above cp = {worst_dual_rel:.3e}");
    println!("worst ratio*round*1.05/cp = {worst_round:.4}");
    println!("elapsed {:?}", t0.elapsed());
    Ok(())
}
