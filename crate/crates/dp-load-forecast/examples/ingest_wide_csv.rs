//! Wide-to-long ingestion: parse a GEFCom-shaped wide file (24 hour
//! columns per row, quoted thousands separators, blank cells as gaps),
//! compute per-zone statistics, and emit the canonical long layout.
//!
//! Run with `cargo run --example ingest_wide_csv`.

use dp_load_forecast::ingest::{parse_wide_csv, write_long_csv, zone_statistics, SeriesKind};

fn main() -> dp_load_forecast::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("loads.csv");

    let mut text = String::from("zone_id,year,month,day");
    for h in 1..=24 {
        text.push_str(&format!(",h{h}"));
    }
    text.push('\n');
    // Zone 1: quoted thousands separators and one missing cell (h3).
    text.push_str("1,2004,1,1,\"1,234\",\"1,180\",,980,940,960,\"1,020\",\"1,150\",\"1,300\",\"1,420\",\"1,390\",\"1,360\",\"1,340\",\"1,330\",\"1,350\",\"1,420\",\"1,560\",\"1,740\",\"1,890\",\"1,850\",\"1,720\",\"1,540\",\"1,380\",\"1,290\"\n");
    text.push_str("1,2004,1,2,1200,1150,1100,990,950,970,1040,1170,1320,1440,1410,1380,1350,1340,1360,1430,1580,1760,1910,1870,1730,1550,1390,1300\n");
    // Zone 2: small constant loads.
    text.push_str("2,2004,1,1,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500,500\n");
    text.push_str("2,2004,1,2,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510,510\n");
    std::fs::write(&path, text)?;

    let series = parse_wide_csv(&path, SeriesKind::Load)?;
    println!("parsed {} zones:", series.len());
    for s in &series {
        let stats = zone_statistics(s, 0.0)?;
        println!(
            "  zone {}: {} hours ({} gaps), mean {:.1} kW, median {:.1}, range [{:.0}, {:.0}]",
            s.entity_id(),
            s.len(),
            stats.gaps,
            stats.mean,
            stats.median,
            stats.min,
            stats.max,
        );
    }

    let mut long = Vec::new();
    write_long_csv(&mut long, &series)?;
    let long = String::from_utf8(long).expect("csv is utf-8");
    println!();
    println!("canonical long layout (first 5 rows):");
    for line in long.lines().take(5) {
        println!("  {line}");
    }
    println!("  ... {} rows total; the gap row has an empty value field", long.lines().count() - 1);
    Ok(())
}
