use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ares::engine::{ares_plan, write_level_log};
use ares::eval::{required_samples, run_experiments, summarize, write_records_csv, Timing};
use ares::flock::{random_initial, FlockConfig, FlockMdp};
use ares::io::PlanFile;
use ares::mdp::Mdp;
use ares::par;
use ares::render::flock_svg;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::Failure;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn write_error(path: &Path) -> impl Fn(ares::Error) -> Failure + '_ {
    move |e| Failure::usage(format!("cannot write {}: {e}", path.display()))
}

fn checked(c: &RunConfig) -> Result<FlockMdp, Failure> {
    c.validate().map_err(Failure::usage)?;
    FlockMdp::new(c.birds, c.flock.clone()).map_err(|e| Failure::usage(e.to_string()))
}

pub fn plan(c: &RunConfig, out: &Path, log: &Path) -> Result<(), Failure> {
    let mdp = checked(c)?;
    let digest = c.digest().map_err(Failure::usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let start = random_initial(&mut rng, c.birds, &c.flock).map_err(|e| Failure::planning(e.to_string()))?;
    let outcome = par::with_workers(c.workers, || ares_plan(&mdp, &start, &c.ares, c.seed))
        .map_err(|e| Failure::planning(e.to_string()))?;
    write_level_log(&outcome.levels, create(log)?).map_err(write_error(log))?;

    let Some(plan) = outcome.plan else {
        return Err(Failure::planning(format!(
            "no plan below phi = {}: best cost {:e} after {} levels ({:.2} s)",
            c.ares.phi,
            outcome.final_cost,
            outcome.levels.len(),
            outcome.wall_time.as_secs_f64()
        )));
    };
    let actions = plan.total_actions();
    PlanFile::new(plan, c.seed, digest).save(out).map_err(write_error(out))?;
    println!(
        "plan: cost {:e} with {} actions over {} levels in {:.2} s -> {}",
        outcome.final_cost,
        actions,
        outcome.levels.len(),
        outcome.wall_time.as_secs_f64(),
        out.display()
    );
    Ok(())
}

pub fn eval(c: &RunConfig, out: &Path, summary_path: &Path, redact_time: bool) -> Result<(), Failure> {
    checked(c)?;
    let params = c.eval_params();
    let required = required_samples(c.epsilon, c.delta).map_err(|e| Failure::usage(e.to_string()))?;
    let n = params.sample_count().map_err(|e| Failure::usage(e.to_string()))?;
    println!(
        "N = {n} experiments with {} birds (the bound asks for {required} at epsilon = {}, delta = {})",
        c.birds, c.epsilon, c.delta
    );
    let records = run_experiments(&params).map_err(|e| Failure::usage(e.to_string()))?;
    let timing = if redact_time { Timing::Redact } else { Timing::Include };
    write_records_csv(&records, create(out)?, timing).map_err(write_error(out))?;
    let summary = summarize(&records, c.epsilon, c.delta).map_err(|e| Failure::usage(e.to_string()))?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(summary_path, json + "\n")
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", summary_path.display())))?;
    print!("{summary}");
    Ok(())
}

fn load_plan(path: &Path) -> Result<PlanFile<FlockConfig>, Failure> {
    PlanFile::load(path).map_err(|e| Failure::usage(format!("cannot read plan {}: {e}", path.display())))
}

pub fn replay(c: &RunConfig, path: &Path) -> Result<(), Failure> {
    let mdp = checked(c)?;
    let file = load_plan(path)?;
    let digest = c.digest().map_err(Failure::usage)?;
    if file.params_digest != digest {
        return Err(Failure::mismatch(format!(
            "parameter digest mismatch: plan was made with {}, current parameters give {digest}",
            file.params_digest
        )));
    }
    let (state, cost) = file.plan().replay(&mdp).map_err(|e| Failure::mismatch(format!("replay failed: {e}")))?;
    if cost.to_bits() != file.final_cost.to_bits() {
        return Err(Failure::mismatch(format!(
            "final cost mismatch: recorded {:?}, replayed {cost:?}",
            file.final_cost
        )));
    }
    if state != file.final_state {
        return Err(Failure::mismatch("replayed final state differs from the recorded one"));
    }
    if cost.is_nan() || cost > c.ares.phi {
        return Err(Failure::mismatch(format!("final cost {cost:?} is above phi = {}", c.ares.phi)));
    }
    println!("replay ok: {} actions reproduce final cost {cost:?}", file.plan().total_actions());
    Ok(())
}

pub fn render(c: &RunConfig, path: &Path, out: &Path) -> Result<(), Failure> {
    c.flock.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let file = load_plan(path)?;
    let mdp = FlockMdp::new(file.initial_state.birds(), c.flock.clone()).map_err(|e| Failure::usage(e.to_string()))?;
    let states = file.plan().level_states(&mdp).map_err(|e| Failure::usage(e.to_string()))?;
    std::fs::create_dir_all(out).map_err(|e| Failure::usage(format!("cannot create {}: {e}", out.display())))?;
    for (k, state) in states.iter().enumerate() {
        let cost = mdp.cost(state).unwrap_or(f64::NAN);
        let label = if k == 0 { "initial".to_string() } else { format!("level {k}") };
        let svg = flock_svg(state, &c.flock, &format!("{label}: J = {cost:.3e}"));
        let frame = out.join(format!("frame_{k:03}.svg"));
        std::fs::write(&frame, svg).map_err(|e| Failure::usage(format!("cannot write {}: {e}", frame.display())))?;
    }
    println!("{} frames -> {}", states.len(), out.display());
    Ok(())
}
