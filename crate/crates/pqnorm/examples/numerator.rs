use pqnorm::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> Result<()> {
    let n_samples = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for &(p, q) in &[(f64::INFINITY, 1.0), (4.0, 4.0 / 3.0), (f64::INFINITY, 2.0)] {
        let pair = ExponentPair::new(p, q)?;
        let a = DenseMatrix::gaussian(3, 3, &mut rng);
        let opts = SolveOptions::default();
        let sol = solve_cp(&a, &pair, &opts)?;
        let gram = build_krivine_gram(&sol, &pair, DEFAULT_TRUNCATION)?;
        let rows = gram_rows(&gram)?;
        let c = gram.c;
        let pstar = pair.pstar();
        let mut sums = vec![0.0f64; 9];
        let mut sqs = vec![0.0f64; 9];
        let mut g = vec![0.0f64; 6];
        let mut draw_rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..n_samples {
            for gi in g.iter_mut() { *gi = draw_rng.sample(StandardNormal); }
            let z: Vec<f64> = rows.phi.iter().map(|r| r.iter().zip(&g).map(|(a,b)| a*b).sum()).collect();
            let w: Vec<f64> = rows.psi.iter().map(|r| r.iter().zip(&g).map(|(a,b)| a*b).sum()).collect();
            let py = holder_dual(&z, q)?;
            let px = holder_dual(&w, pstar)?;
            for i in 0..3 { for j in 0..3 {
                let v = py[i] * px[j];
                sums[i*3+j] += v; sqs[i*3+j] += v*v;
            }}
        }
        let mut worst_sigma = 0.0f64;
        for i in 0..3 { for j in 0..3 {
            let mean = sums[i*3+j] / n_samples as f64;
            let var = (sqs[i*3+j] / n_samples as f64 - mean*mean).max(0.0);
            let se = (var / n_samples as f64).sqrt();
            let scale = gaussian_moment(pair.pstar())?.powf(pair.pstar())
                * gaussian_moment(pair.q)?.powf(pair.q);
            let expected = scale * c * sol.u[i].iter().zip(&sol.v[j]).map(|(a,b)| a*b).sum::<f64>();
            let sig = if se > 0.0 { (mean - expected).abs() / se } else { 0.0 };
            worst_sigma = worst_sigma.max(sig);
        }}
        println!("p={p} q={q}: worst entry sigma = {worst_sigma:.2}, fallback={}", rows.rescale_fallback);
    }
    Ok(())
}
