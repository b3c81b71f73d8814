//! Maps raw feature rows into the unit cube and splits them per class.

use copysample::preprocess::{fit_normalization, stratified_split};
use copysample::rng::RandomSource;
use copysample::space::{ClassLabel, LabeledSample, Point};

fn main() -> copysample::Result<()> {
    let mut rng = RandomSource::new(0);
    let raw: Vec<Vec<f64>> = (0..1_000)
        .map(|_| {
            vec![
                rng.standard_normal() * 12.0 + 50.0,
                rng.uniform() * 3.0 - 1.0,
            ]
        })
        .collect();
    let t = fit_normalization(&raw)?;
    let rows: Vec<LabeledSample> = raw
        .iter()
        .map(|r| {
            let label = ClassLabel(usize::from(r[0] > 55.0) + usize::from(r[1] > 1.5));
            LabeledSample::new(Point(t.apply(r)), label)
        })
        .collect();
    let (train, test) = stratified_split(&rows, 0.8, &mut rng)?;
    for (name, part) in [("all", &rows), ("train", &train), ("test", &test)] {
        let mut counts = [0usize; 3];
        part.iter().for_each(|s| counts[s.label.0] += 1);
        println!("{name:>5}: {} rows, per class {counts:?}", part.len());
    }
    println!("first row raw {:?} -> {:?}", raw[0], rows[0].point.coords());
    Ok(())
}
