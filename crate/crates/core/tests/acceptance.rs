use slspec::corpus::default_corpus;
use slspec::validation::run_all;

fn main() {
    let outcomes = run_all(&default_corpus(), |o| println!("{}", o.line()));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
