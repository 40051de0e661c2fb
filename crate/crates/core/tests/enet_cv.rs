use macrosig::linmodels::{cv_elastic_net, enet_importance};
use macrosig::models::EnetConfig;
use macrosig::sim;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_vec(n, p, sim::normals(rng, n * p))
}

#[test]
fn pure_noise_response_picks_the_heaviest_penalty() {
    let grid = EnetConfig::default();
    let top = *grid.lambda_grid.last().unwrap();
    let mut hits = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x = design(&mut rng, 150, 8);
        let y = sim::normals(&mut rng, 150);
        let cv = cv_elastic_net(&x, &y, &grid.lambda_grid, &grid.l1_ratio_grid, 5, seed).unwrap();
        hits += usize::from(cv.best_lambda == top);
    }
    println!("largest lambda chosen in {hits}/10 seeds");
    assert!(hits > 5);
}

#[test]
fn sparse_signal_ranks_first() {
    let grid = EnetConfig::default();
    let mut hits = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let x = design(&mut rng, 200, 20);
        let e = sim::normals(&mut rng, 200);
        let y: Vec<f64> = (0..200).map(|i| 1.5 * x[(i, 0)] - 1.0 * x[(i, 1)] + 0.8 * x[(i, 2)] + e[i]).collect();
        let cv = cv_elastic_net(&x, &y, &grid.lambda_grid, &grid.l1_ratio_grid, 5, seed).unwrap();
        let names: Vec<String> = (0..20).map(|j| format!("x{j:02}")).collect();
        let mut top3: Vec<String> = enet_importance(&cv.refit, &names).into_iter().take(3).map(|(n, _)| n).collect();
        top3.sort();
        hits += usize::from(top3 == ["x00", "x01", "x02"]);
    }
    println!("true predictors top-3 in {hits}/10 seeds");
    assert!(hits >= 8);
}

#[test]
fn binary_labels_get_stratified_folds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = design(&mut rng, 120, 4);
    let y: Vec<f64> = (0..120).map(|i| f64::from(x[(i, 0)] > 1.0)).collect();
    let cv = cv_elastic_net(&x, &y, &[0.01, 0.1], &[0.5], 4, 9).unwrap();
    assert_eq!(cv.grid.len(), 2);
    assert!(cv.refit.coefficients[0] > 0.0);
}
