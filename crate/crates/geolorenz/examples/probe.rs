use geolorenz::map::LorenzLikeMap;
use geolorenz::measure::birkhoff_histogram;

fn main() {
    let m = LorenzLikeMap::doubling();
    let b = birkhoff_histogram(&m, 1.0 / std::f64::consts::PI, 1_000_000, 32).unwrap();
    println!("restarts: {}", b.restarts);
    for (i, d) in b.densities.iter().enumerate() {
        println!("bin {i:2}: {:.4}  dev {:+.4}", d, d - 0.5);
    }
}
