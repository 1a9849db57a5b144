//! Sample a fleet from the travel-pattern model and look at it.

use mmg_core::ev::{sample_fleet, write_fleet, Battery, EvBehaviorModel};
use mmg_core::HOURS;

fn main() -> mmg_core::Result<()> {
    let model = EvBehaviorModel::default();
    let fleet = sample_fleet(130, &model, &Battery::default(), 0.5, 0, 7)?;

    let mut plugged = [0usize; HOURS];
    for ev in &fleet {
        for (h, n) in plugged.iter_mut().enumerate() {
            *n += usize::from(ev.profile.is_connected(h));
        }
    }
    println!("connected vehicles by hour");
    for (h, n) in plugged.iter().enumerate() {
        println!("{h:>2} {:<40} {n}", "#".repeat(n * 40 / fleet.len()));
    }

    let controllable = fleet.iter().filter(|e| e.profile.controllable).count();
    let mean_km = fleet.iter().map(|e| e.mileage_km).sum::<f64>() / fleet.len() as f64;
    println!(
        "{controllable} of {} controllable, mean mileage {mean_km:.1} km",
        fleet.len()
    );

    let profiles: Vec<_> = fleet.iter().take(5).map(|e| e.profile.clone()).collect();
    write_fleet(&profiles, std::io::stdout())?;
    Ok(())
}
