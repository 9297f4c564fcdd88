use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use ontodx::client::{Backend, Client, ImageRef, ObserveError};
use ontodx::config::{ConfigError, ConfigLayers, RunConfig};
use ontodx::eval::{run_evaluation, write_outputs, Evaluation, Manifest};
use ontodx::prompt::build_prompt;
use ontodx::query::{QueryBuilder, QueryOutcome};
use ontodx::reasoner::AbnormalityVocabulary;
use ontodx::{classify_expression, extract_vocabulary, parse_ontology, Ontology};

/// Ontology-grounded disease diagnosis from multimodal model replies.
///
/// Settings come from a JSON config file, then ONTODX_* environment
/// variables, then flags; later sources win. API keys are read only from
/// the provider's environment variable.
#[derive(Parser)]
#[command(name = "ontodx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the abnormality vocabulary extracted from the ontology as JSON.
    Vocab {
        #[command(flatten)]
        common: Common,
    },
    /// Print the rendered prompt.
    Prompt {
        #[command(flatten)]
        common: Common,
        /// Print the prompt text, vocabulary and fingerprint as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Diagnose a single image.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        image: PathBuf,
        /// Which recorded sample to use.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        /// Print the diagnosis with its full trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run every manifest entry and write records.jsonl and summary.json.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        batch: Batch,
    },
    /// Run only the healthy manifest entries and report no-abnormality rates.
    Ablation {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        batch: Batch,
    },
}

#[derive(Args)]
struct Common {
    /// Ontology in OWL functional syntax.
    #[arg(long, env = "ONTODX_ONTOLOGY")]
    ontology: PathBuf,
    /// JSON run configuration.
    #[arg(long, env = "ONTODX_CONFIG")]
    config: Option<PathBuf>,
    /// openai-style, anthropic-style, google-style, replay or mock.
    #[arg(long, env = "ONTODX_BACKEND")]
    backend: Option<Backend>,
    /// Model name as the provider knows it.
    #[arg(long, env = "ONTODX_MODEL")]
    model: Option<String>,
    /// Sampling temperature (default 0.7).
    #[arg(long, env = "ONTODX_TEMPERATURE")]
    temperature: Option<f64>,
    /// Nucleus sampling mass (default 1.0).
    #[arg(long, env = "ONTODX_TOP_P")]
    top_p: Option<f64>,
    /// Reply length cap (default 1024).
    #[arg(long, env = "ONTODX_MAX_OUTPUT_TOKENS")]
    max_output_tokens: Option<u32>,
    /// Override the provider's default endpoint.
    #[arg(long, env = "ONTODX_ENDPOINT_URL")]
    endpoint_url: Option<String>,
    /// Directory of recorded replies for the replay backend.
    #[arg(long, env = "ONTODX_REPLAY_DIR")]
    replay_dir: Option<PathBuf>,
    /// What the images show, e.g. "rice leaf".
    #[arg(long, env = "ONTODX_ENTITY")]
    entity: Option<String>,
    /// Plant part added to every query (default Leaf).
    #[arg(long, env = "ONTODX_PLANT_PART")]
    plant_part: Option<String>,
    /// Class whose descendants are the candidate diseases (default RiceDisease).
    #[arg(long, env = "ONTODX_DISEASE_ROOT")]
    disease_root: Option<String>,
    /// When a diagnosis counts as correct (default strict-unique).
    #[arg(long, env = "ONTODX_MATCH_POLICY", value_parser = ["strict-unique", "gold-in-matched"])]
    match_policy: Option<String>,
    /// Score only exact gold concepts, without descendant credit.
    #[arg(long)]
    strict_em: bool,
}

#[derive(Args)]
struct Batch {
    /// JSON-lines manifest of images and gold classes.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for records.jsonl and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Save every live reply under this directory in the replay layout.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Replies requested per image.
    #[arg(long, env = "ONTODX_SAMPLES")]
    samples: Option<usize>,
    /// Entries processed at once (default 4).
    #[arg(long, env = "ONTODX_CONCURRENCY")]
    concurrency: Option<usize>,
}

enum Failure {
    /// Bad invocation or unreadable input: exit 2.
    Usage(String),
    /// The pipeline rejected the input: exit 1.
    Domain(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::UndeclaredClass(_) => Failure::Domain(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn domain(stage: &str) -> impl Fn(&dyn std::fmt::Display) -> Failure + '_ {
    move |e| Failure::Domain(format!("[{stage}] {e}"))
}

impl Common {
    fn run_config(&self, batch: Option<&Batch>) -> Result<RunConfig, Failure> {
        let mut layers = match &self.config {
            Some(path) => ConfigLayers::from_file(path)?,
            None => ConfigLayers::default(),
        };
        let mut set = |path: &str, value: Option<Value>| {
            if let Some(v) = value {
                layers.set(path, v);
            }
        };
        set("model.backend", self.backend.map(|b| Value::from(b.to_string())));
        set("model.model_name", self.model.clone().map(Value::from));
        set("model.temperature", self.temperature.map(Value::from));
        set("model.top_p", self.top_p.map(Value::from));
        set("model.max_output_tokens", self.max_output_tokens.map(Value::from));
        set("model.endpoint_url", self.endpoint_url.clone().map(Value::from));
        set(
            "model.replay_dir",
            self.replay_dir
                .as_ref()
                .map(|p| Value::from(p.to_string_lossy().into_owned())),
        );
        set("entity", self.entity.clone().map(Value::from));
        set("plant_part", self.plant_part.clone().map(Value::from));
        set("disease_root", self.disease_root.clone().map(Value::from));
        set("match_policy", self.match_policy.clone().map(Value::from));
        if self.strict_em {
            set("em_mode", Some(Value::from("strict")));
        }
        if let Some(b) = batch {
            set("samples", b.samples.map(Value::from));
            set("concurrency", b.concurrency.map(Value::from));
        }
        Ok(layers.resolve()?)
    }

    fn ontology(&self) -> Result<Ontology, Failure> {
        let text = std::fs::read_to_string(&self.ontology)
            .map_err(|e| Failure::Usage(format!("cannot read ontology {}: {e}", self.ontology.display())))?;
        parse_ontology(&text).map_err(|e| domain("ontology")(&e))
    }
}

fn vocabulary(onto: &Ontology, config: &RunConfig) -> Result<AbnormalityVocabulary, Failure> {
    let roots = config.vocabulary_roots(onto)?;
    extract_vocabulary(onto, &roots).map_err(|e| domain("vocabulary")(&e))
}

fn client(config: &RunConfig, record: Option<&Path>) -> Result<Client, Failure> {
    let model = config
        .model
        .clone()
        .ok_or_else(|| Failure::Usage("no model configured: pass --backend and --model or a config file".into()))?;
    if record.is_some() && !model.backend.is_http() {
        return Err(Failure::Usage("--record needs an HTTP backend".into()));
    }
    let client = Client::new(model).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(match record {
        Some(dir) => client.recording_to(dir),
        None => client,
    })
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn evaluate(common: &Common, batch: &Batch, healthy_only: bool) -> Result<Evaluation, Failure> {
    let config = common.run_config(Some(batch))?;
    let onto = common.ontology()?;
    let vocab = vocabulary(&onto, &config)?;
    let prompt = build_prompt(&config.entity, &vocab).map_err(|e| domain("prompt")(&e))?;
    let settings = config.eval_settings(&onto)?;
    if !batch.manifest.is_file() {
        return Err(Failure::Usage(format!("cannot read manifest {}", batch.manifest.display())));
    }
    let mut manifest = Manifest::load(&batch.manifest, &onto, &settings.disease_root).map_err(|e| domain("manifest")(&e))?;
    if healthy_only {
        manifest = manifest.healthy_only().map_err(|e| domain("manifest")(&e))?;
    }
    let client = client(&config, batch.record.as_deref())?;
    let evaluation = run_evaluation(&manifest, &onto, &vocab, &prompt, &client, &settings).map_err(|e| domain("evaluate")(&e))?;
    let (records, summary) = write_outputs(&batch.out, &evaluation)
        .map_err(|e| Failure::Usage(format!("cannot write to {}: {e}", batch.out.display())))?;
    for e in &evaluation.report.errors {
        eprintln!("entry {} ({}) [{}] {}", e.index, e.image_path, e.stage, e.message);
    }
    eprintln!("wrote {} and {}", records.display(), summary.display());
    Ok(evaluation)
}

fn classify(common: &Common, image: &Path, sample: usize, json: bool) -> Result<(), Failure> {
    let config = common.run_config(None)?;
    let onto = common.ontology()?;
    let vocab = vocabulary(&onto, &config)?;
    let prompt = build_prompt(&config.entity, &vocab).map_err(|e| domain("prompt")(&e))?;
    let settings = config.eval_settings(&onto)?;
    let client = client(&config, None)?;
    let image = ImageRef::from_path(image).map_err(|e| Failure::Usage(format!("[image] {e}")))?;
    let obs = client.observe(&prompt, &image, sample).map_err(|e| match e {
        ObserveError::Send(e) => domain("send")(&e),
        ObserveError::Parse { error, .. } => domain("parse")(&error),
    })?;
    let builder = QueryBuilder::new(&onto, &vocab, settings.plant_part.clone()).map_err(|e| domain("query")(&e))?;
    let query = match builder.build(&onto, &obs).map_err(|e| domain("query")(&e))? {
        QueryOutcome::HealthyFinding => {
            if json {
                print_json(&serde_json::json!({"observation": obs, "result": "healthy-finding"}));
            } else {
                println!("no abnormality detected");
            }
            return Ok(());
        }
        QueryOutcome::Expression(q) => q,
    };
    let diagnosis = classify_expression(&onto, &query, &settings.disease_root).map_err(|e| domain("classify")(&e))?;
    if json {
        print_json(&serde_json::json!({"observation": obs, "diagnosis": diagnosis}));
        return Ok(());
    }
    let names: Vec<String> = diagnosis.matched.iter().map(|d| onto.label(d)).collect();
    if names.is_empty() {
        println!("diagnosis: none");
    } else {
        println!("diagnosis: {}", names.join(", "));
    }
    println!("query: {}", query.manchester());
    for (disease, verdict) in &diagnosis.verdicts {
        if verdict.holds {
            println!("{} holds:", onto.label(disease));
            for step in &verdict.trace {
                let indent = "  ".repeat(step.depth + 1);
                match &step.query_part {
                    Some(q) => println!(
                        "{indent}{:?} {} <- {}",
                        step.rule,
                        step.definition_part.manchester(),
                        q.manchester()
                    ),
                    None => println!("{indent}{:?} {}", step.rule, step.definition_part.manchester()),
                }
            }
        } else if let Some(f) = &verdict.first_failure {
            println!(
                "{} fails: nothing in the query satisfies {}",
                onto.label(disease),
                f.definition_part.manchester()
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Vocab { common } => {
            let config = common.run_config(None)?;
            let onto = common.ontology()?;
            print_json(&vocabulary(&onto, &config)?);
        }
        Command::Prompt { common, json } => {
            let config = common.run_config(None)?;
            let onto = common.ontology()?;
            let prompt = build_prompt(&config.entity, &vocabulary(&onto, &config)?).map_err(|e| domain("prompt")(&e))?;
            if json {
                print_json(&prompt);
            } else {
                print!("{}", prompt.text);
            }
        }
        Command::Classify {
            common,
            image,
            sample,
            json,
        } => classify(&common, &image, sample, json)?,
        Command::Evaluate { common, batch } => {
            let evaluation = evaluate(&common, &batch, false)?;
            print_json(&evaluation.report.classification_accuracy);
        }
        Command::Ablation { common, batch } => {
            let evaluation = evaluate(&common, &batch, true)?;
            print_json(&evaluation.report.ablation);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
