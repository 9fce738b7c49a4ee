// temporary root-cause probe for the NaN-score panic
use probls::driver::{run, DriverConfig, Mode};
use probls::objectives::{make_problem, ProblemKind, ProblemSpec};

fn main() {
    let mut spec = ProblemSpec::new(ProblemKind::LogisticRegression, 20, 1);
    spec.rows = 5000;
    spec.test_rows = 1000;
    spec.separation = 3.0;
    let problem = make_problem(&spec).unwrap();
    for alpha in [1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        for seed in [100u64, 101] {
            let mut cfg = DriverConfig::new(Mode::LineSearch, alpha, 10, seed);
            cfg.num_epochs = Some(10);
            let r = std::panic::catch_unwind(|| {
                run(problem.objective(), &problem.initial_point(), &cfg).unwrap()
            });
            match r {
                Ok(res) => {
                    let err = problem.test_error(&res.final_x).unwrap();
                    println!("alpha {alpha:>6} seed {seed}: ok, steps {}, err {err:.4}", res.trace.rows.len());
                }
                Err(_) => println!("alpha {alpha:>6} seed {seed}: PANIC"),
            }
        }
    }
}
