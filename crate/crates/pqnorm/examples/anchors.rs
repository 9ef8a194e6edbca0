use pqnorm::*;

fn main() -> Result<()> {
    let mid = ExponentPair::from_ab(0.5, 0.5)?;
    println!("c(0.5,0.5)   = {:.15}", compute_c(&mid, DEFAULT_TRUNCATION, 1e-12)?);
    let delta = 0.974203f64.asinh();
    println!("tail(31,d,0) = {:.10}", tail_bound(31, delta, 0.0)?);
    let g = ExponentPair::new(f64::INFINITY, 1.0)?;
    let cb = certified_hinv_lower_bound(&g, 31, DEFAULT_TRUNCATION, 1e-9)?;
    println!("cert(0,0)    = rho {:.10} delta {:.10} tail {:.10}", cb.rho, cb.delta, cb.tail_bound);
    let mut min_rho = f64::INFINITY;
    let mut min_at = (0.0, 0.0);
    let mut i = 0;
    while i <= 19 {
        let a = i as f64 * 0.05;
        let mut j = 0;
        while j <= 19 {
            let b = j as f64 * 0.05;
            let pair = ExponentPair::from_ab(a, b)?;
            let rho = certified_hinv_lower_bound(&pair, 31, 60, 1e-9)?.rho;
            if rho < min_rho { min_rho = rho; min_at = (a, b); }
            j += 1;
        }
        i += 1;
    }
    println!("grid min     = {:.10} at {:?}", min_rho, min_at);
    println!("c(0,0)       = {:.15}", compute_c(&g, DEFAULT_TRUNCATION, 1e-12)?);
    println!("asinh(1)     = {:.15}", 1f64.asinh());
    println!("implied eps  = {:.6}", 1f64.asinh() / cb.rho - 1.0);
    Ok(())
}
