//! `build-manifest`: draw a balanced evaluation manifest from audio pools.

use std::path::Path;

use airgap_core::manifest::{
    build_manifest, load_pools, read_uids, validate_manifest, write_manifest,
};
use clap::Args;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{ensure_parent, require, resolve, FailCtx, Failure};

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct BuildManifestArgs {
    /// Pool definition JSON: cells of label/language/architecture globs.
    #[arg(long)]
    pub pools: Option<String>,
    /// Setup uid list, one per line.
    #[arg(long)]
    pub uids: Option<String>,
    /// Clips per (setup, language, architecture) cell [default: 10].
    #[arg(long)]
    pub n: Option<usize>,
    /// Draw seed, recorded in the manifest [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output manifest path (JSON lines).
    #[arg(long)]
    pub out: Option<String>,
}

impl Merge for BuildManifestArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            pools: self.pools.or(fallback.pools),
            uids: self.uids.or(fallback.uids),
            n: self.n.or(fallback.n),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
        }
    }
}

pub fn run(args: BuildManifestArgs, root: &Path) -> Result<(), Failure> {
    let pools_path = require(args.pools, "pools")?;
    let uids_path = require(args.uids, "uids")?;
    let out = require(args.out, "out")?;
    let n = args.n.unwrap_or(10);
    let seed = args.seed.unwrap_or(0);

    let (bona, spoof) =
        load_pools(resolve(root, &pools_path), root).or_input("loading the pools")?;
    let uids = read_uids(resolve(root, &uids_path)).or_input("reading the uid list")?;
    let manifest =
        build_manifest(&bona, &spoof, &uids, n, seed).or_input("building the manifest")?;

    let out_path = resolve(root, &out);
    ensure_parent(&out_path)?;
    write_manifest(&manifest, &out_path).or_internal("writing the manifest")?;

    let report = validate_manifest(&manifest);
    for violation in &report.balance_violations {
        log::warn!("setup {}: {}", violation.uid, violation.details.join("; "));
    }
    println!(
        "wrote {}: {} entries across {} setups ({} per cell, seed {}), balance {}",
        out_path.display(),
        manifest.entries.len(),
        report.per_uid.len(),
        n,
        seed,
        if report.is_valid() { "ok" } else { "VIOLATED" },
    );
    Ok(())
}
