//! The metering data flow: households perturb their readings locally,
//! the zone aggregates them, zones sum to the region. Negative perturbed
//! readings are expected and preserved — clamping would break the privacy
//! guarantee.
//!
//! Run with `cargo run --example simulate_metering`.

use chrono::NaiveDate;
use dp_load_forecast::metering::{aggregate_region, aggregate_zone, perturb_household, Zone};
use dp_load_forecast::rng::Substreams;
use dp_load_forecast::series::HourlySeries;

fn main() -> dp_load_forecast::Result<()> {
    let start = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let hours = 24;
    let lambda = 5.0;
    let streams = Substreams::new(2024);

    let mut zone_series = Vec::new();
    for zone_idx in 1..=2 {
        let households: Vec<String> =
            (1..=50).map(|h| format!("z{zone_idx}-h{h}")).collect();
        let zone = Zone::new(zone_idx.to_string(), households.clone())?;

        // Each household: a modest base load plus an evening peak.
        let perturbed: Vec<HourlySeries> = households
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let raw: Vec<f64> = (0..hours)
                    .map(|h| {
                        let evening = if (18..22).contains(&h) { 1.5 } else { 0.0 };
                        0.3 + evening + 0.01 * i as f64
                    })
                    .collect();
                let series = HourlySeries::new(id.clone(), start, raw)?;
                perturb_household(&series, zone.n(), lambda, &streams)
            })
            .collect::<dp_load_forecast::Result<_>>()?;

        let negative_readings: usize = perturbed
            .iter()
            .flat_map(|s| s.values())
            .filter(|v| v.is_some_and(|x| x < 0.0))
            .count();
        println!(
            "zone {zone_idx}: {} households perturbed, {negative_readings} readings went negative",
            zone.n()
        );

        zone_series.push(aggregate_zone(zone.zone_id.clone(), &perturbed)?);
    }

    let region = aggregate_region(&zone_series)?;
    println!();
    println!("{:>20} {:>12} {:>12} {:>12}", "hour", "zone 1", "zone 2", "region");
    for i in [0, 6, 12, 19, 23] {
        println!(
            "{:>20} {:>12.3} {:>12.3} {:>12.3}",
            region.timestamp_at(i),
            zone_series[0].values()[i].unwrap(),
            zone_series[1].values()[i].unwrap(),
            region.values()[i].unwrap(),
        );
    }
    println!();
    println!(
        "by divisibility the zone aggregates carry exact Laplace({lambda}) noise, \
         whatever the group size"
    );
    Ok(())
}
