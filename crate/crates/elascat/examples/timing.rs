use elascat::dtn::BackgroundMedium;
use elascat::fem::{build_disk_mesh, MaterialField, Incidence, WaveKind};
use elascat::solver::ForwardModel;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    for p in [64usize, 128, 256, 512] {
        let mesh = Arc::new(build_disk_mesh(1.0, 0, p).unwrap());
        let medium = BackgroundMedium::default();
        let model = ForwardModel::new(mesh.clone(), medium, 10.0).unwrap();
        let q = MaterialField::zeros(mesh.num_nodes());
        let t0 = Instant::now();
        let sys = model.assemble(&q).unwrap();
        let t_asm = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let sol = model.solve_forward(&sys, Incidence { kind: WaveKind::P, angle: 0.0 }).unwrap();
        let t_first = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let _adj = model.solve_adjoint(&sys, &sol.trace).unwrap();
        let t_second = t0.elapsed().as_secs_f64();
        println!("P={p:4} nodes={:6} assemble {:.3}s factor+solve {:.3}s extra solve {:.3}s",
                 mesh.num_nodes(), t_asm, t_first, t_second);
    }
}
