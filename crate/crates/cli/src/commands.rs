use std::fs;

use clda::eval::{
    default_grid, fit_point, holdout_accuracy, kfold_cv, CvConfig, EpsilonSpec, EvalReport,
    GridPoint, Method, MinMax, DEFAULT_QUANTILES,
};
use clda::synth::{add_gaussian_noise, add_gaussian_noise_inplace, angle_to_x_axis_deg, derive_seed, make_artificial};
use clda::{Dataset, NoiseSpec};

use crate::error::CliError;
use crate::io::{read_table, write_matrix, CsvOut};
use crate::{ArtificialArgs, EvalArgs, FitArgs, NoiseArgs};

fn opt_to_string<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn fit(a: FitArgs) -> Result<(), CliError> {
    let table = read_table(&a.input.input)?;
    let (mut data, _) = table.to_dataset(a.input.label_col.as_deref())?;
    if a.normalize {
        let mm = MinMax::fit(data.features());
        data = data.with_features(mm.apply(data.features()))?;
    }
    let method = Method::from(a.method);
    let epsilon = match (a.epsilon, a.epsilon_quantile) {
        (Some(e), _) => EpsilonSpec::Fixed(e),
        (None, Some(q)) => EpsilonSpec::Quantile(q),
        (None, None) => EpsilonSpec::Quantile(0.9),
    };
    let point = GridPoint {
        d: a.d,
        epsilon: Some(epsilon),
    };
    let (proj, eps) = fit_point(&data, method, &point, &a.solver.options())?;

    write_matrix(&a.out, &proj.w, "w")?;
    if let Some(path) = &a.trace_out {
        let mut out = CsvOut::create(path)?;
        out.row(["iteration", "objective"])?;
        for (t, v) in proj.objective_trace.iter().enumerate() {
            out.row([t.to_string(), v.to_string()])?;
        }
        out.finish()?;
    }

    let first = proj.objective_trace.first().copied().unwrap_or(f64::NAN);
    let last = proj.objective_trace.last().copied().unwrap_or(f64::NAN);
    match method {
        Method::Lda => println!("LDA: d={} ratio={last}", proj.dim()),
        Method::Clda => {
            println!(
                "CLDA: d={} epsilon={} iterations={} converged={} objective {first} -> {last}",
                proj.dim(),
                opt_to_string(eps),
                proj.iterations,
                proj.converged
            );
            if proj.padded {
                eprintln!("warning: fewer than d nonzero eigenvalues; padded with null-space directions");
            }
            if proj.between_fallbacks > 0 {
                eprintln!(
                    "warning: every class term was capped in {} iteration(s); used uncapped class weights",
                    proj.between_fallbacks
                );
            }
        }
    }
    Ok(())
}

fn eval_grid(a: &EvalArgs, data: &Dataset) -> Result<Vec<GridPoint>, CliError> {
    let method = Method::from(a.method);
    let base = default_grid(method, data.n_features(), data.n_classes(), &[1.0]);
    let ds: Vec<usize> = match &a.d_grid {
        Some(ds) => ds.clone(),
        None => base.iter().map(|p| p.d).collect(),
    };
    if ds.is_empty() {
        return Err(CliError::Invalid("empty dimension grid".into()));
    }
    let eps: Vec<EpsilonSpec> = match (&a.epsilons, &a.quantiles) {
        (Some(e), _) => e.iter().map(|&v| EpsilonSpec::Fixed(v)).collect(),
        (None, Some(q)) => q.iter().map(|&v| EpsilonSpec::Quantile(v)).collect(),
        (None, None) => DEFAULT_QUANTILES.iter().map(|&v| EpsilonSpec::Quantile(v)).collect(),
    };
    Ok(match method {
        Method::Lda => ds.iter().map(|&d| GridPoint { d, epsilon: None }).collect(),
        Method::Clda => ds
            .iter()
            .flat_map(|&d| eps.iter().map(move |&e| GridPoint { d, epsilon: Some(e) }))
            .collect(),
    })
}

fn noise_fields(noise: Option<&NoiseSpec>) -> [String; 4] {
    match noise {
        Some(n) => [
            n.feature_fraction.to_string(),
            n.sample_fraction.to_string(),
            n.variance.to_string(),
            n.seed.to_string(),
        ],
        None => Default::default(),
    }
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Repetition `r` splits folds with sub-seed `2r` and draws noise from `2r + 1`.
pub fn eval(a: EvalArgs) -> Result<(), CliError> {
    if a.repetitions == 0 {
        return Err(CliError::Invalid("--repetitions must be >= 1".into()));
    }
    let table = read_table(&a.input.input)?;
    let (data, _) = table.to_dataset(a.input.label_col.as_deref())?;
    let method = Method::from(a.method);
    let grid = eval_grid(&a, &data)?;

    let mut reports: Vec<EvalReport> = Vec::with_capacity(a.repetitions);
    for r in 0..a.repetitions as u64 {
        let noise = a.noise.spec(derive_seed(a.seed, 2 * r + 1))?;
        let cfg = CvConfig {
            k: a.folds,
            seed: derive_seed(a.seed, 2 * r),
            method,
            grid: grid.clone(),
            solver: a.solver.options(),
            normalize: !a.no_normalize,
            noise,
        };
        let report = kfold_cv(&data, &cfg)?;
        if !report.stratified {
            eprintln!("warning: repetition {r}: a class has fewer than {} samples; folds are not stratified", a.folds);
        }
        for (fold, err) in &report.failures {
            eprintln!("warning: repetition {r}: fold {fold} failed: {err}");
        }
        reports.push(report);
    }

    let mut out = CsvOut::create(&a.out)?;
    out.row([
        "repetition", "method", "accuracy", "std_dev", "d", "epsilon", "folds", "failed_folds",
        "stratified", "noise_features", "noise_samples", "noise_variance", "noise_seed",
    ])?;
    println!("{:>10}  {:>9}  {:>7}  {:>2}  epsilon", "repetition", "accuracy", "std", "d");
    for (r, rep) in reports.iter().enumerate() {
        let eps = opt_to_string(rep.chosen.epsilon);
        let mut fields = vec![
            r.to_string(),
            method.to_string(),
            rep.accuracy.to_string(),
            rep.std_dev.to_string(),
            rep.chosen.d.to_string(),
            eps.clone(),
            a.folds.to_string(),
            rep.failures.len().to_string(),
            rep.stratified.to_string(),
        ];
        fields.extend(noise_fields(rep.noise.as_ref()));
        out.row(&fields)?;
        println!(
            "{r:>10}  {:>9.2}  {:>7.2}  {:>2}  {eps}",
            rep.accuracy, rep.std_dev, rep.chosen.d
        );
    }
    let accs: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let std = sample_std(&accs);
    let mut fields = vec![
        "mean".to_string(),
        method.to_string(),
        mean.to_string(),
        std.to_string(),
    ];
    fields.extend(std::iter::repeat_n(String::new(), 9));
    out.row(&fields)?;
    out.finish()?;
    println!("{method} accuracy {mean:.2} ± {std:.2} over {} repetition(s)", a.repetitions);
    Ok(())
}

/// Run `r` generates its data from sub-seed `r` of `--seed`; training noise
/// uses stream 1 of that data seed.
pub fn artificial(a: ArtificialArgs) -> Result<(), CliError> {
    if a.runs == 0 {
        return Err(CliError::Invalid("--runs must be >= 1".into()));
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let opts = a.solver.options();
    let points = [
        (Method::Lda, GridPoint { d: 1, epsilon: None }),
        (
            Method::Clda,
            GridPoint {
                d: 1,
                epsilon: Some(EpsilonSpec::Quantile(a.epsilon_quantile)),
            },
        ),
    ];

    let mut results = CsvOut::create(&a.out_dir.join("results.csv"))?;
    results.row(["run", "data_seed", "method", "accuracy", "angle_deg", "epsilon"])?;
    let mut directions = CsvOut::create(&a.out_dir.join("directions.csv"))?;
    directions.row(["run", "method", "wx", "wy"])?;
    let mut samples = CsvOut::create(&a.out_dir.join("points.csv"))?;
    samples.row(["run", "set", "label", "x", "y"])?;

    let mut sums = [(0.0, 0.0); 2];
    for r in 0..a.runs as u64 {
        let data_seed = derive_seed(a.seed, r);
        let (mut train, test) = make_artificial(data_seed);
        if let Some(spec) = a.noise.spec(derive_seed(data_seed, 1))? {
            train = add_gaussian_noise(&train, &spec)?;
        }
        for (set, ds) in [("train", &train), ("test", &test)] {
            for j in 0..ds.n_samples() {
                let x = ds.sample(j);
                samples.row([
                    r.to_string(),
                    set.to_string(),
                    ds.class_names()[ds.labels()[j]].clone(),
                    x[0].to_string(),
                    x[1].to_string(),
                ])?;
            }
        }
        for (k, (method, point)) in points.iter().enumerate() {
            let (acc, proj, eps) = holdout_accuracy(&train, &test, *method, point, &opts)?;
            let w = proj.w.column(0);
            let angle = angle_to_x_axis_deg(w);
            sums[k].0 += acc;
            sums[k].1 += angle;
            results.row([
                r.to_string(),
                data_seed.to_string(),
                method.to_string(),
                acc.to_string(),
                angle.to_string(),
                opt_to_string(eps),
            ])?;
            directions.row([r.to_string(), method.to_string(), w[0].to_string(), w[1].to_string()])?;
        }
    }
    results.finish()?;
    directions.finish()?;
    samples.finish()?;
    for (k, (method, _)) in points.iter().enumerate() {
        println!(
            "{method}: mean accuracy {:.2}, mean angle {:.2} deg over {} run(s)",
            sums[k].0 / a.runs as f64,
            sums[k].1 / a.runs as f64,
            a.runs
        );
    }
    Ok(())
}

/// Pollutes the numeric columns of a CSV; untouched cells are copied
/// verbatim.
pub fn noise(a: NoiseArgs) -> Result<(), CliError> {
    let spec = NoiseSpec::new(a.feature_fraction, a.sample_fraction, a.variance, a.seed)?;
    let table = read_table(&a.input.input)?;
    let label = match a.input.label_col.as_deref() {
        Some(spec) => Some(table.column_index(spec)?),
        None => table.headers.len().checked_sub(1),
    };
    let (original, cols) = table.numeric_columns(label)?;
    let mut noisy = original.clone();
    add_gaussian_noise_inplace(&mut noisy, &spec)?;

    let mut rows = table.rows.clone();
    for (i, &c) in cols.iter().enumerate() {
        for (j, row) in rows.iter_mut().enumerate() {
            if noisy[[i, j]] != original[[i, j]] {
                row[c] = noisy[[i, j]].to_string();
            }
        }
    }
    let mut out = CsvOut::create(&a.out)?;
    out.row(&table.headers)?;
    for row in &rows {
        out.row(row)?;
    }
    out.finish()?;
    let changed = noisy.iter().zip(original.iter()).filter(|(x, y)| x != y).count();
    println!("polluted {changed} value(s) in {}", a.out.display());
    Ok(())
}
