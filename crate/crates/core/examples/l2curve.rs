use std::cell::RefCell;
use sdpinn_core::geometry::{discretize_conditions, partition};
use sdpinn_core::lbfgs::{minimize_observed, OptimConfig};
use sdpinn_core::mlp::{init_xavier, Architecture, ParameterVector};
use sdpinn_core::problems::Problem;
use sdpinn_core::training::*;

fn main() {
    // args: scenario(pinn|pent) seed max_iters
    let args: Vec<String> = std::env::args().collect();
    let scenario = args.get(1).map(|s| s.as_str()).unwrap_or("pinn");
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let max_iters: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(12000);

    let problem = Problem::kdv(20.0);
    let part = partition(problem.rect(), problem.group(), &[-0.5]).unwrap();
    let whole = partition(problem.rect(), problem.group(), &[]).unwrap();
    let arch = Architecture::hidden(4, 40).unwrap();

    let (sub, train_part, region, with_iface) = match scenario {
        "pent" => (1usize, &part, Some(1usize), true),
        _ => (0usize, &whole, None, false),
    };
    let sd = &train_part.subdomains[sub];
    let pool = discretize_conditions(&problem, sd, 400, 200).unwrap();
    // subset: reuse session seeding conventions
    let conditions = {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, sub, 1)));
        idx.truncate(200);
        idx.sort_unstable();
        idx.into_iter().map(|i| pool[i]).collect::<Vec<_>>()
    };
    let interface_labeled = if with_iface {
        sdpinn_core::geometry::interface_points(problem.group(), &problem, -0.5, &problem.rect(), 100).unwrap()
    } else { Vec::new() };
    let collocation = sd.sample_collocation_lhs(2000, derive_seed(seed, sub, 2)).unwrap();
    let data = SubdomainData { conditions, interface_labeled, interior_labels: Vec::new(), collocation, isc_points: None };
    let obj = RefCell::new(SubdomainObjective::new(&problem, &arch, data, LossWeights::default(), false, false).unwrap());
    let init = init_xavier(&arch, derive_seed(seed, sub, 0));
    let mut cfg = OptimConfig::default();
    cfg.max_iters = max_iters;
    cfg.memory = 100;
    let part_ref = &part;
    let problem_ref = &problem;
    let arch_ref = &arch;
    let (best, trace) = minimize_observed(
        |p, g| obj.borrow_mut().eval(p, g),
        &init.values,
        &cfg,
        |iter, p| {
            if iter % 1000 == 0 {
                let nets = vec![(arch_ref.clone(), ParameterVector::new(p.to_vec())), (arch_ref.clone(), ParameterVector::new(p.to_vec()))];
                let grid = stitch(problem_ref, part_ref, &nets, 400, 200).unwrap();
                let l2 = l2_relative_error(&grid, region).unwrap();
                println!("iter {iter}: L2 {l2:.4e}");
            }
        },
    ).unwrap();
    let nets = vec![(arch.clone(), ParameterVector::new(best.clone())), (arch.clone(), ParameterVector::new(best))];
    let grid = stitch(&problem, &part, &nets, 400, 200).unwrap();
    println!("final ({} iters, term {:?}): L2 {:.4e}", trace.records.len(), trace.termination,
        l2_relative_error(&grid, region).unwrap());
}
