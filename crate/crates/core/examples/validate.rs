//! Recompute every embedded reference cell and print per-table pass counts.

use bcsm::io::validate::{evaluate_cells, reference_cells, summarize, ValidationSettings};

fn main() -> bcsm::Result<()> {
    let results = evaluate_cells(&reference_cells(), &ValidationSettings::default())?;
    for (table, (pass, total)) in summarize(&results) {
        println!("{table:<8} {pass:>4}/{total}");
    }
    let worst = results.iter().filter(|r| !r.pass).max_by(|a, b| {
        let gap = |r: &&bcsm::io::validate::CellResult| (r.computed - r.cell.value).abs();
        gap(a).total_cmp(&gap(b))
    });
    if let Some(r) = worst {
        println!(
            "largest miss: {} {} {} {} {}, expected {} got {:.3}",
            r.cell.table, r.cell.model, r.cell.band, r.cell.label, r.cell.params, r.cell.value, r.computed
        );
    }
    Ok(())
}
