use linkage_core::*;

fn main() {
    let r2 = 2.0f64.sqrt();
    let l = K33Lengths::chain(0.05, 1.0, 1.0, 1.0, 1.0)
        .with_f(r2).with_alpha(1.0).with_beta(r2).with_gamma(1.0);
    // look at raw sweep gammas per tuple near a few columns
    let samples = sweep(&l, 4000).unwrap();
    use std::collections::BTreeMap;
    let mut per: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for s in &samples {
        per.entry(s.signs.to_string()).or_default().push((s.theta, s.gamma));
    }
    for (k, v) in &per {
        let n = v.len();
        let mut maxjump = 0.0f64;
        for w in v.windows(2) {
            maxjump = maxjump.max((w[1].1 - w[0].1).abs());
        }
        let g0 = v[0].1;
        let dev = v.iter().map(|(_, g)| (g - 1.0).abs()).fold(0.0f64, f64::max);
        println!("tuple {k}: n={n} gamma[0]={g0:.16} max|dgamma|={maxjump:.3e} max|gamma-1|={dev:.3e}");
    }
}
