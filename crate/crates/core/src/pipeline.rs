//! End-to-end refinement: scan plus LoD2 model in, LoD3 model and relabeled
//! scan out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::bayes::{
    back_project, decide_and_cluster, posterior_layer, unexplained_conflicts, BackProjection,
    CellCluster, PosteriorLayer,
};
use crate::building::BuildingModel;
use crate::cloud::PointCloud;
use crate::config::{load_cpt, Config};
use crate::error::{Error, Result};
use crate::eval::{det_metrics, seg_metrics, DetMetrics, DetectedBox, Report, TruthOpening};
use crate::library::OpeningLibrary;
use crate::occupancy::OccupancyGrid;
use crate::recon::{
    apply_fit, assemble_lod3, compute_fit, dispatch, opening_id, select_entry, Diagnostic,
};
use crate::shape::{extract_openings, OpeningCandidate};
use crate::sim::ground_truth_boxes;
use crate::textures::{
    fuse_points, model_compare, points_compare, Facade, FusionSummary, ModelCellLabel,
    PointsCellLabel, TextureLayer,
};
use crate::uncertainty::{combine, FacadeConfidence};

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Library to fill openings from; a parametric box library of the
    /// configured depth otherwise.
    pub library: Option<OpeningLibrary>,
    pub grid_dump: Option<PathBuf>,
    pub shapes_dump: Option<PathBuf>,
}

/// Everything computed for one wall.
#[derive(Debug, Clone)]
pub struct FacadeResult {
    pub facade: Facade,
    pub model_layer: TextureLayer<ModelCellLabel>,
    pub points_layer: TextureLayer<PointsCellLabel>,
    pub posterior: PosteriorLayer,
    pub clusters: Vec<CellCluster>,
    pub candidates: Vec<OpeningCandidate>,
    pub diagnostics: Vec<Diagnostic>,
    pub back_projection: BackProjection,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub occupancy: Duration,
    pub fusion: Duration,
    pub facades: Duration,
    pub reconstruction: Duration,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub model: BuildingModel,
    pub cloud: PointCloud,
    pub confidence: FacadeConfidence,
    pub fusion: FusionSummary,
    pub facades: Vec<FacadeResult>,
    pub warnings: Vec<String>,
    pub timings: StageTimings,
}

impl PipelineOutput {
    pub fn candidates(&self) -> impl Iterator<Item = &OpeningCandidate> {
        self.facades.iter().flat_map(|f| f.candidates.iter())
    }

    pub fn diagnostics(&self) -> impl Iterator<Item = &Diagnostic> {
        self.facades.iter().flat_map(|f| f.diagnostics.iter())
    }

    pub fn detected_boxes(&self) -> Vec<DetectedBox> {
        self.candidates()
            .map(|c| DetectedBox {
                facade: c.facade.clone(),
                bbox: c.bbox,
            })
            .collect()
    }
}

pub fn run_pipeline(
    model: &BuildingModel,
    cloud: &PointCloud,
    config: &Config,
    opts: &PipelineOptions,
) -> Result<PipelineOutput> {
    config.validate()?;
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };
    model.validate()?;
    let base = if model.openings.is_empty() {
        model.clone()
    } else {
        warn(format!(
            "input model `{}` already has {} openings; they are replaced",
            model.id,
            model.openings.len()
        ));
        model.to_lod2()
    };
    if cloud.is_empty() {
        warn("point cloud is empty; no openings can be detected".into());
    }
    let spec = load_cpt(config)?;
    let library = match &opts.library {
        Some(l) => l.clone(),
        None => OpeningLibrary::parametric(config.recon.depth),
    };
    library
        .validate()
        .map_err(|e| e.in_stage("reconstruction"))?;
    let conf = combine(&config.uncertainty);
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let mut grid = OccupancyGrid::covering(
        config.grid,
        cloud,
        Some(&base),
        conf.upper_ci + 2.0 * config.grid.voxel_size,
    )
    .map_err(|e| e.in_stage("occupancy"))?;
    grid.insert_cloud(cloud)
        .map_err(|e| e.in_stage("occupancy"))?;
    grid.populate_model(&base, &conf)
        .map_err(|e| e.in_stage("occupancy"))?;
    timings.occupancy = t.elapsed();

    let t = Instant::now();
    let mut refined = cloud.clone();
    let fusion = fuse_points(&mut grid, &mut refined, &config.fusion);
    timings.fusion = t.elapsed();
    if let Some(path) = &opts.grid_dump {
        grid.write_dump(path)?;
    }

    let t = Instant::now();
    let cell = config.grid.voxel_size;
    let mut facades = Vec::new();
    for wall in base.walls() {
        let facade = Facade::new(wall, cell).map_err(|e| e.in_stage("textures"))?;
        let model_layer = model_compare(&grid, &facade);
        let points_layer = points_compare(&grid, &facade);
        let mut posterior =
            posterior_layer(&model_layer, &points_layer, &spec).map_err(|e| e.in_stage("bayes"))?;
        let clusters = decide_and_cluster(&mut posterior, spec.p_t);
        let conflicts = unexplained_conflicts(&posterior);
        let back_projection = back_project(
            &clusters,
            &posterior,
            &facade,
            &grid,
            &mut refined,
            spec.d_mold,
        );
        let routed =
            dispatch(&facade.id, cell, &clusters, &conflicts).map_err(|e| e.in_stage("shape"))?;
        let candidates = extract_openings(
            &facade.id,
            facade.rows,
            facade.cols,
            cell,
            routed.openings,
            &config.shape,
        )
        .map_err(|e| e.in_stage("shape"))?;
        for d in &routed.triggers {
            log::info!(
                "{}: {} conflicted cells unexplained at u={:.2} v={:.2}",
                d.facade,
                d.cells,
                d.bbox.u_min,
                d.bbox.v_min
            );
        }
        facades.push(FacadeResult {
            facade,
            model_layer,
            points_layer,
            posterior,
            clusters,
            candidates,
            diagnostics: routed.triggers,
            back_projection,
        });
    }
    timings.facades = t.elapsed();

    let t = Instant::now();
    let mut solids = Vec::new();
    for f in &facades {
        for (k, c) in f.candidates.iter().enumerate() {
            let entry = select_entry(&library, c.kind).map_err(|e| e.in_stage("reconstruction"))?;
            let fit = compute_fit(&c.bbox, &f.facade.frame, config.recon.recess_m)
                .map_err(|e| e.in_stage("reconstruction"))?;
            solids.push(
                apply_fit(entry, &fit, &opening_id(&f.facade.id, k), &f.facade.id)
                    .map_err(|e| e.in_stage("reconstruction"))?,
            );
        }
    }
    let lod3 = assemble_lod3(&base, solids).map_err(|e| e.in_stage("reconstruction"))?;
    timings.reconstruction = t.elapsed();

    let out = PipelineOutput {
        model: lod3,
        cloud: refined,
        confidence: conf,
        fusion,
        facades,
        warnings,
        timings,
    };
    if let Some(path) = &opts.shapes_dump {
        write_shapes_csv(out.candidates(), path)?;
    }
    Ok(out)
}

/// One row per accepted opening candidate.
pub fn write_shapes_csv<'a>(
    candidates: impl Iterator<Item = &'a OpeningCandidate>,
    path: &Path,
) -> Result<()> {
    let mut s = String::from("facade,kind,u_min,v_min,width,height,area,cells,completeness,rectangularity,mean_posterior\n");
    for c in candidates {
        let _ = writeln!(
            s,
            "{},{},{:.3},{:.3},{:.3},{:.3},{:.4},{},{:.4},{:.4},{:.4}",
            c.facade,
            c.kind,
            c.bbox.u_min,
            c.bbox.v_min,
            c.bbox.width,
            c.bbox.height,
            c.area,
            c.cells.len(),
            c.completeness,
            c.rectangularity,
            c.mean_posterior
        );
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Truth openings of a model as evaluation records; `measured` decides
/// which of them the scan actually saw.
pub fn truth_openings(
    truth: &BuildingModel,
    measured: impl Fn(&str) -> bool,
) -> Result<Vec<TruthOpening>> {
    Ok(ground_truth_boxes(truth)?
        .into_iter()
        .map(|t| TruthOpening {
            measured: measured(&t.opening),
            facade: t.facade,
            bbox: t.bbox,
        })
        .collect())
}

/// Front rectangles of a refined model's openings.
pub fn model_boxes(model: &BuildingModel) -> Result<Vec<DetectedBox>> {
    Ok(ground_truth_boxes(model)?
        .into_iter()
        .map(|t| DetectedBox {
            facade: t.facade,
            bbox: t.bbox,
        })
        .collect())
}

/// Detection scores of predicted against true openings.
pub fn evaluate_models(
    pred: &BuildingModel,
    truth: &BuildingModel,
    measured: impl Fn(&str) -> bool,
    iou_threshold: f64,
) -> Result<DetMetrics> {
    Ok(det_metrics(
        &model_boxes(pred)?,
        &truth_openings(truth, measured)?,
        iou_threshold,
    ))
}

/// Report with whatever truth is available.
pub fn build_report(
    config: &Config,
    input: Option<&PointCloud>,
    refined: Option<&PointCloud>,
    truth_cloud: Option<&PointCloud>,
    detection: Option<DetMetrics>,
) -> Result<Report> {
    let seg = |c: Option<&PointCloud>| -> Result<_> {
        match (c, truth_cloud) {
            (Some(c), Some(t)) => seg_metrics(c, t).map(Some),
            _ => Ok(None),
        }
    };
    Ok(Report {
        segmentation_input: seg(input)?,
        segmentation_refined: seg(refined)?,
        detection,
        params: serde_json::to_value(config).map_err(|e| Error::Schema(e.to_string()))?,
    })
}
