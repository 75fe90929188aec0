use std::time::Instant;
use sdpinn_core::geometry::partition;
use sdpinn_core::mlp::Architecture;
use sdpinn_core::problems::Problem;
use sdpinn_core::training::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let scenario = args.get(1).map(|s| s.as_str()).unwrap_or("kdv_sdpinn");
    let max_iters: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0);

    match scenario {
        "kdv_sdpinn" | "kdv_isc" => {
            let problem = Problem::kdv(20.0);
            let part = partition(problem.rect(), problem.group(), &[-0.5]).unwrap();
            let arch = Architecture::hidden(4, 40).unwrap();
            let method = if scenario == "kdv_isc" { Method::SdPinnIsc } else { Method::SdPinn };
            let mut cfg = TrainingConfig::new(method, vec![
                SubTrainConfig::new(arch.clone(), 200, 2000),
                SubTrainConfig::new(arch.clone(), 200, 2000),
            ]);
            cfg.optim.max_iters = max_iters;
            if let Ok(m) = std::env::var("CAL_MEM") { cfg.optim.memory = m.parse().unwrap(); }
            let mut nets = Vec::new();
            let subs: Vec<usize> = std::env::var("CAL_SUBS").map(|s| s.split(",").map(|v| v.parse().unwrap()).collect()).unwrap_or_else(|_| vec![0, 1]);
            for &sub in &subs {
                let t0 = Instant::now();
                let r = train_subdomain(&problem, &part, sub, &cfg, seed).unwrap();
                let iters = r.trace.records.len();
                if std::env::var("CAL_TRAJ").is_ok() { for (it, rep) in &r.reports { print!("  [{it}:{:.2e}]", rep.total); } println!(); }
                let loss = r.trace.records.last().map(|r| r.loss).unwrap_or(f64::NAN);
                println!("sub {sub}: {iters} iters, loss {loss:.3e}, term {:?}, {:.1}s, evals {}",
                    r.trace.termination, t0.elapsed().as_secs_f64(), r.trace.evaluations);
                nets.push((r.archs[0].clone(), r.params[0].clone()));
            }
            if nets.len() == 2 {
                let grid = stitch(&problem, &part, &nets, 400, 200).unwrap();
                println!("L2 whole {:.4e}  L2 tri {:.4e}  L2 pent {:.4e}",
                    l2_relative_error(&grid, None).unwrap(),
                    l2_relative_error(&grid, Some(0)).unwrap(),
                    l2_relative_error(&grid, Some(1)).unwrap());
            } else {
                let grid = stitch(&problem, &part, &[nets[0].clone(), nets[0].clone()], 400, 200).unwrap();
                println!("L2 sub{} {:.4e}", subs[0],
                    l2_relative_error(&grid, Some(subs[0])).unwrap());
            }
        }
        "kdv_pinn" => {
            let problem = Problem::kdv(args.get(4).and_then(|s| s.parse().ok()).unwrap_or(20.0));
            let whole = partition(problem.rect(), problem.group(), &[]).unwrap();
            let part = partition(problem.rect(), problem.group(), &[-0.5]).unwrap();
            let arch = Architecture::hidden(4, 40).unwrap();
            let mut cfg = TrainingConfig::new(Method::Pinn, vec![SubTrainConfig::new(arch.clone(), 200, 2000)]);
            cfg.optim.max_iters = max_iters;
            if let Ok(m) = std::env::var("CAL_MEM") { cfg.optim.memory = m.parse().unwrap(); }
            let t0 = Instant::now();
            let r = train_subdomain(&problem, &whole, 0, &cfg, seed).unwrap();
            println!("pinn: {} iters, loss {:.3e}, term {:?}, {:.1}s",
                r.trace.records.len(), r.trace.records.last().map(|x| x.loss).unwrap_or(f64::NAN),
                r.trace.termination, t0.elapsed().as_secs_f64());
            let nets = vec![(r.archs[0].clone(), r.params[0].clone())];
            let grid = stitch(&problem, &part, &nets, 400, 200).unwrap();
            println!("L2 whole {:.4e}", l2_relative_error(&grid, None).unwrap());
        }
        "nvf" => {
            let problem = Problem::nvf();
            let part = partition(problem.rect(), problem.group(), &[2.0, 0.4, -0.4, -2.0]).unwrap();
            let arch = Architecture::hidden(4, 20).unwrap();
            let method = if args.get(4).map(|s| s == "isc").unwrap_or(false) { Method::SdPinnIsc } else { Method::SdPinn };
            let mut cfg = TrainingConfig::new(method, (0..5).map(|_| SubTrainConfig::new(arch.clone(), 100, 1000)).collect());
            cfg.optim.max_iters = max_iters;
            if let Ok(m) = std::env::var("CAL_MEM") { cfg.optim.memory = m.parse().unwrap(); }
            cfg.grid_nt = 100;
            if let Ok(w) = std::env::var("CAL_WU") { cfg.weights.w_u = w.parse().unwrap(); }
            if let Ok(w) = std::env::var("CAL_WF") { cfg.weights.w_f = w.parse().unwrap(); }
            if let Ok(w) = std::env::var("CAL_WG") { cfg.weights.w_g = w.parse().unwrap(); }
            let subs: Vec<usize> = std::env::var("CAL_SUBS").map(|s| s.split(",").map(|v| v.parse().unwrap()).collect()).unwrap_or_else(|_| (0..5).collect());
            let mut nets = Vec::new();
            for &sub in &subs {
                let t0 = Instant::now();
                let r = train_subdomain(&problem, &part, sub, &cfg, seed).unwrap();
                if std::env::var("CAL_TRAJ").is_ok() { for (it, rep) in &r.reports { print!("  [{it}:{:.2e}]", rep.total); } println!(); }
                let fin = r.reports.last().unwrap().1;
                println!("sub {sub}: {} iters, loss {:.3e}, mse_u {:.2e} mse_f {:.2e} mse_g {:?}, term {:?}, {:.1}s",
                    r.trace.records.len(), r.trace.records.last().map(|x| x.loss).unwrap_or(f64::NAN),
                    fin.mse_u.unwrap_or(f64::NAN), fin.mse_f.unwrap_or(f64::NAN), fin.mse_g,
                    r.trace.termination, t0.elapsed().as_secs_f64());
                nets.push((r.archs[0].clone(), r.params[0].clone()));
            }
            if subs.len() == 5 {
                let grid = stitch(&problem, &part, &nets, 400, 100).unwrap();
                print!("L2 whole {:.4e} ", l2_relative_error(&grid, None).unwrap());
                for s in 0..5 { print!(" e{}={:.3e}", s+1, l2_relative_error(&grid, Some(s)).unwrap()); }
                println!();
            } else {
                let filled: Vec<_> = (0..5).map(|_| nets[0].clone()).collect();
                let grid = stitch(&problem, &part, &filled, 400, 100).unwrap();
                println!("L2 sub{} {:.4e}", subs[0], l2_relative_error(&grid, Some(subs[0])).unwrap());
            }
        }
        "inverse" | "inverse_pinn" => {
            let b: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(5.0);
            let problem = Problem::kdv(b);
            let part = partition(problem.rect(), problem.group(), &[-0.5]).unwrap();
            let arch = Architecture::hidden(4, 40).unwrap();
            let (n_f, n_p) = if b == 5.0 { (2000, 600) } else { (1000, 500) };
            let method = if scenario == "inverse" { Method::Inverse } else { Method::InversePinn };
            let n_cfg = if method == Method::Inverse { 2 } else { 1 };
            let mut cfg = TrainingConfig::new(method,
                (0..n_cfg).map(|_| SubTrainConfig::new(arch.clone(), 100, n_f)).collect());
            cfg.n_p = n_p;
            cfg.optim.max_iters = max_iters;
            if let Ok(m) = std::env::var("CAL_MEM") { cfg.optim.memory = m.parse().unwrap(); }
            let t0 = Instant::now();
            let r = train_inverse(&problem, &part, &cfg, seed).unwrap();
            let inv = r.inverse.unwrap();
            println!("{scenario} b={b}: {} iters, loss {:.3e}, term {:?}, {:.1}s, lambda {:.5} (err {:.3e})",
                r.trace.records.len(), r.trace.records.last().map(|x| x.loss).unwrap_or(f64::NAN),
                r.trace.termination, t0.elapsed().as_secs_f64(), inv.lambda, inv.lambda_rel_err);
            let nets = vec![(r.archs[0].clone(), r.params[0].clone())];
            let grid = stitch(&problem, &part, &nets, 400, 200).unwrap();
            println!("L2 tri {:.4e}", l2_relative_error(&grid, Some(0)).unwrap());
        }
        "nvf_pinn" => {
            let problem = Problem::nvf();
            let whole = partition(problem.rect(), problem.group(), &[]).unwrap();
            let part = partition(problem.rect(), problem.group(), &[2.0, 0.4, -0.4, -2.0]).unwrap();
            let arch = Architecture::hidden(4, 20).unwrap();
            let mut cfg = TrainingConfig::new(Method::Pinn, vec![SubTrainConfig::new(arch.clone(), 100, 1000)]);
            cfg.optim.max_iters = max_iters;
            cfg.grid_nt = 100;
            if let Ok(m) = std::env::var("CAL_MEM") { cfg.optim.memory = m.parse().unwrap(); }
            if let Ok(w) = std::env::var("CAL_WF") { cfg.weights.w_f = w.parse().unwrap(); }
            let t0 = Instant::now();
            let r = train_subdomain(&problem, &whole, 0, &cfg, seed).unwrap();
            println!("nvf pinn: {} iters, loss {:.3e}, term {:?}, {:.1}s",
                r.trace.records.len(), r.trace.records.last().map(|x| x.loss).unwrap_or(f64::NAN),
                r.trace.termination, t0.elapsed().as_secs_f64());
            let nets = vec![(r.archs[0].clone(), r.params[0].clone())];
            let grid = stitch(&problem, &part, &nets, 400, 100).unwrap();
            println!("L2 whole {:.4e}", l2_relative_error(&grid, None).unwrap());
        }
        "xpinn" => {
            let problem = Problem::kdv(20.0);
            let part = partition(problem.rect(), problem.group(), &[-0.5]).unwrap();
            let arch = Architecture::hidden(4, 40).unwrap();
            let mut cfg = TrainingConfig::new(Method::Xpinn, vec![
                SubTrainConfig::new(arch.clone(), 200, 2000),
                SubTrainConfig::new(arch.clone(), 200, 2000),
            ]);
            cfg.optim.max_iters = max_iters;
            if let Ok(m) = std::env::var("CAL_MEM") { cfg.optim.memory = m.parse().unwrap(); }
            let t0 = Instant::now();
            let r = train_xpinn(&problem, &part, &cfg, seed).unwrap();
            println!("xpinn: {} iters, loss {:.3e}, term {:?}, {:.1}s",
                r.trace.records.len(), r.trace.records.last().map(|x| x.loss).unwrap_or(f64::NAN),
                r.trace.termination, t0.elapsed().as_secs_f64());
            let nets: Vec<_> = r.archs.iter().cloned().zip(r.params.iter().cloned()).collect();
            let grid = stitch(&problem, &part, &nets, 400, 200).unwrap();
            println!("L2 whole {:.4e} tri {:.4e} pent {:.4e}",
                l2_relative_error(&grid, None).unwrap(),
                l2_relative_error(&grid, Some(0)).unwrap(),
                l2_relative_error(&grid, Some(1)).unwrap());
        }
        other => eprintln!("unknown scenario {other}"),
    }
}
// env knobs picked up by a wrapper would go here
