use oscillon::diagnostics::{energy_density, localization_metric};
use oscillon::dynamics::{evolve, Problem, StepperConfig};
use oscillon::init::{make_initial, InitKind};
use oscillon::potential::{builtin, BuiltinName};
use oscillon::spectral::Grid;

fn run(g: &Grid, name: BuiltinName, h: f64, amp: f64, k0: f64, seed: u64, t_end: f64) -> (f64, f64) {
    let b = builtin(name, None).unwrap();
    let p = Problem::new(g, &b.potential, 6, h);
    let z = make_initial(g, &InitKind::Thermal { seed, amplitude: amp, k0 }, 6, h, 0.0).unwrap();
    let cfg = StepperConfig::strang(0.005);
    let mut min_late = f64::INFINITY;
    let mut last = 0.0;
    evolve(&z, t_end, &cfg, &p, |zt| {
        if zt.t >= t_end / 2.0 {
            let f = energy_density(g, zt, &b.potential, h);
            let m = localization_metric(&f).unwrap_or(0.0);
            min_late = min_late.min(m);
            last = m;
        }
    }).unwrap();
    (min_late, last)
}

fn main() {
    let g = Grid::new(256).unwrap();
    for (h, amp, k0, t) in [(0.2_f64, 15.0_f64, 2.0_f64, 80.0_f64), (0.2, 12.0, 2.2, 80.0), (0.18, 15.0, 2.0, 90.0)] {
        println!("--- H={h} amp={amp} k0={k0} T={t}");
        for seed in 0..14u64 {
            let (vm_min, _) = run(&g, BuiltinName::Vminus, h, amp, k0, seed, t);
            let (_, vp_end) = run(&g, BuiltinName::Vplus, h, amp, k0, seed, t);
            let ok = vm_min >= 5.0 && vp_end <= 2.0;
            println!("seed={seed}: Vminus_min_late={vm_min:.2} Vplus_end={vp_end:.2} {}", if ok {"<== OK"} else {""});
        }
    }
}
