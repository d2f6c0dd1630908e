//! Fixtures shared by the benchmarks.

use roadcloud::sim::Rsu;
use roadcloud::{Capacity, CorridorConfig, GameConfig, RateModel, VmClassSpec, VmGameParams};

/// `n` players with interior equilibria on a 50 x 100 cloudlet.
pub fn interior_game(n: usize) -> GameConfig {
    let players = (0..n)
        .map(|i| VmGameParams::new(1.0 + 0.1 * i as f64, 1.5, 0.3, 0.5).unwrap())
        .collect();
    GameConfig::new(Capacity::unreserved(50.0, 100.0).unwrap(), players).unwrap()
}

/// Two VM classes on a 50 x 100 site with the given local rate and reservation.
pub fn two_class_model(local_rate: f64, compute_reserved: f64, storage_reserved: f64) -> RateModel {
    let classes = vec![
        VmClassSpec::new(20.0, 15.0, local_rate, 2.0, 0.05, 0.1).unwrap(),
        VmClassSpec::new(10.0, 40.0, local_rate, 2.0, 0.05, 0.1).unwrap(),
    ];
    RateModel::new(classes, Capacity::new(50.0, 100.0, compute_reserved, storage_reserved).unwrap()).unwrap()
}

/// Many small VM classes, for a state space in the tens of thousands.
pub fn large_model() -> RateModel {
    let classes = (0..3)
        .map(|k| VmClassSpec::new(2.0 + k as f64, 3.0, 0.5, 1.0, 0.2, 0.5).unwrap())
        .collect();
    RateModel::new(classes, Capacity::new(30.0, 60.0, 6.0, 12.0).unwrap()).unwrap()
}

pub fn corridor(cloudlets: usize) -> CorridorConfig {
    let rsus = (0..10)
        .map(|i| Rsu {
            start: 300.0 * i as f64,
            end: 300.0 * (i + 1) as f64,
            cloudlet: i * cloudlets / 10,
        })
        .collect();
    CorridorConfig::new(rsus, 3000.0, 0.3, (15.0, 30.0), 0.5).unwrap()
}
