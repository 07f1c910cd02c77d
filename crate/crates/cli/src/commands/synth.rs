//! `synth`: dump deterministic synthetic data — a body dataset in the
//! manifest/PLY/JSON layout, or a paired visual/depth auxiliary set with an
//! optional RGB-only target set for the transfer pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use depth_reid::io::{self, AuxManifest, DatasetManifest, FrameEntry, ManifestPerson};
use depth_reid::recognition::euclidean_distance_matrix;
use depth_reid::synthbench::{generate_body, generate_paired_features, identity_spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    /// Point-cloud body dataset (PLY + skeleton JSON + manifest).
    Bodies,
    /// Paired visual/depth auxiliary set (CSVs + manifest), plus targets.
    Paired,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// What to generate.
    #[arg(long, value_enum, default_value = "bodies")]
    pub kind: SynthKind,
    /// Number of identities.
    #[arg(long, default_value_t = 10)]
    pub persons: usize,
    /// Frames per sequence group (bodies).
    #[arg(long, default_value_t = 10)]
    pub frames: usize,
    /// Views per person (paired).
    #[arg(long, default_value_t = 8)]
    pub views: usize,
    /// Target identities to also dump (paired; 0 disables).
    #[arg(long, default_value_t = 0)]
    pub target_persons: usize,
    /// Views per target identity.
    #[arg(long, default_value_t = 4)]
    pub target_views: usize,
    /// View rotation sampled uniformly in +-limit degrees (bodies).
    #[arg(long, default_value_t = 30.0)]
    pub yaw_limit: f64,
    /// Per-coordinate Gaussian noise in mm (bodies).
    #[arg(long, default_value_t = 2.0)]
    pub noise_sigma: f64,
    /// Surface sample density in points per mm^2 (bodies).
    #[arg(long)]
    pub density: Option<f64>,
    /// RNG seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub output_dir: std::path::PathBuf,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("creating {}", args.output_dir.display()))?;
    match args.kind {
        SynthKind::Bodies => bodies(args),
        SynthKind::Paired => paired(args),
    }
}

fn bodies(args: &SynthArgs) -> Result<()> {
    let out = &args.output_dir;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut manifest = DatasetManifest::default();
    for p in 0..args.persons {
        let id = format!("p{p:02}");
        let person_dir = out.join(&id);
        fs::create_dir_all(&person_dir)?;
        let mut sequences = BTreeMap::new();
        for group in ["gallery", "probe"] {
            let mut entries = Vec::new();
            for f in 0..args.frames {
                let mut spec = identity_spec(p);
                spec.noise_sigma = args.noise_sigma;
                spec.view_yaw_deg = rng.random_range(-args.yaw_limit..=args.yaw_limit);
                if let Some(d) = args.density {
                    spec.sample_density = d;
                }
                let (labeled, joints) = generate_body(&spec, rng.random());
                let cloud_rel = format!("{id}/{group}_{f:04}.ply");
                let skel_rel = format!("{id}/{group}_{f:04}.json");
                io::write_ply(&out.join(&cloud_rel), &labeled.cloud)?;
                io::save_skeleton(&out.join(&skel_rel), &joints)?;
                entries.push(FrameEntry {
                    cloud: cloud_rel,
                    skeleton: skel_rel,
                });
            }
            sequences.insert(group.to_string(), entries);
        }
        manifest.persons.push(ManifestPerson { id, sequences });
    }
    let manifest_path = out.join("manifest.json");
    manifest.save(&manifest_path)?;
    println!(
        "synth: {} persons x 2 groups x {} frames at {}",
        args.persons,
        args.frames,
        manifest_path.display()
    );
    Ok(())
}

fn write_matrix_csv(path: &Path, prefix: &str, rows: &[DVector<f64>]) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.len());
    let dims: Vec<String> = (0..dim).map(|i| format!("{prefix}{i}")).collect();
    let data: Vec<Vec<f64>> = rows.iter().map(|r| r.as_slice().to_vec()).collect();
    io::write_features_csv(path, &dims, &data)?;
    Ok(())
}

fn paired(args: &SynthArgs) -> Result<()> {
    let out = &args.output_dir;
    let aux = generate_paired_features(args.persons, args.views, args.seed);
    write_matrix_csv(&out.join("aux_visual.csv"), "v", &aux.visual)?;
    write_matrix_csv(&out.join("aux_depth.csv"), "d", &aux.depth)?;
    io::write_labels_csv(&out.join("aux_labels.csv"), &aux.labels)?;
    let manifest = AuxManifest {
        visual: "aux_visual.csv".into(),
        depth: "aux_depth.csv".into(),
        labels: "aux_labels.csv".into(),
        metadata: Some(serde_json::json!({
            "source": "synthetic paired-feature generator",
            "persons": args.persons,
            "views": args.views,
            "seed": args.seed,
        })),
    };
    let manifest_path = out.join("aux_manifest.json");
    manifest.save(&manifest_path)?;
    println!(
        "synth: auxiliary set of {} persons x {} views at {}",
        args.persons,
        args.views,
        manifest_path.display()
    );

    if args.target_persons > 0 {
        // Unseen identities: continue the person index range.
        let offset = args.persons;
        let targets = generate_paired_features(
            offset + args.target_persons,
            args.target_views,
            args.seed ^ 0x7A26_57E7,
        );
        let keep: Vec<usize> = (0..targets.len())
            .filter(|i| i / args.target_views >= offset)
            .collect();
        let ids: Vec<String> = keep
            .iter()
            .map(|&i| {
                format!(
                    "t{:02}#{}",
                    i / args.target_views - offset,
                    i % args.target_views
                )
            })
            .collect();
        let visual: Vec<DVector<f64>> = keep.iter().map(|&i| targets.visual[i].clone()).collect();
        io::write_features_with_ids(&out.join("target_visual.csv"), &ids, &visual)?;

        // View 0 of each target person forms the gallery; the rest probe.
        let mut gallery = Vec::new();
        let mut probes = Vec::new();
        for (row, id) in ids.iter().enumerate() {
            if id.ends_with("#0") {
                gallery.push(row);
            } else {
                probes.push(row);
            }
        }
        let g_feats: Vec<DVector<f64>> = gallery.iter().map(|&r| visual[r].clone()).collect();
        let p_feats: Vec<DVector<f64>> = probes.iter().map(|&r| visual[r].clone()).collect();
        let rgb = euclidean_distance_matrix(&p_feats, &g_feats);
        let g_ids: Vec<String> = gallery.iter().map(|&r| ids[r].clone()).collect();
        let p_ids: Vec<String> = probes.iter().map(|&r| ids[r].clone()).collect();
        io::write_distance_matrix(&out.join("rgb_distances.csv"), &g_ids, &p_ids, &rgb)?;
        println!(
            "synth: {} target identities ({} gallery, {} probe samples)",
            args.target_persons,
            g_ids.len(),
            p_ids.len()
        );
    }
    Ok(())
}
