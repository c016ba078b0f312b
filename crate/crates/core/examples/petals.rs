//! Petal directions, invariant region and boundary polylines for the two-petal example.

use fibred_flower::models;
use fibred_flower::petals::{petal_boundary, region_params, write_polylines_csv, InfinityMap, PetalModel, RegionBudget, Side};
use fibred_flower::reduction::{classify, ClassifyOptions};
use fibred_flower::rotation::RotationNumber;

fn main() -> fibred_flower::Result<()> {
    let f = models::sine_quadratic(RotationNumber::golden_mean(), 8)?;
    let c = classify(&f, &ClassifyOptions::default())?;
    let model = PetalModel::from_classification(&c)?;
    println!("n = {}, k = {:.4}", model.n(), model.k());
    println!("attracting directions {:?}", model.geometry.attracting);
    println!("repulsive directions {:?}", model.geometry.repulsive);

    let sectors: Vec<_> = model.geometry.attracting.iter().map(|d| model.sector(*d)).collect();
    let maps: Vec<&dyn InfinityMap> = sectors.iter().map(|s| s as &dyn InfinityMap).collect();
    let params = region_params(&maps, &RegionBudget::default())?;
    println!("C = {:.3}, A = {:.3}, L = {:.3}", params.c, params.a, params.l);

    let mut lines = petal_boundary(&model, 0.0, Side::Attracting, params.a, 65)?;
    lines.extend(petal_boundary(&model, 0.0, Side::Repelling, params.a, 65)?);
    let mut csv = Vec::new();
    write_polylines_csv(&mut csv, &lines)?;
    println!("{} polylines, {} bytes of CSV", lines.len(), csv.len());
    Ok(())
}
