"""``broadclass`` command line: segment, batch, features, eval."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import _backend
from .config import Config, load_config
from .detector import Transition
from .errors import BroadClassError
from .evaluation import (DEFAULT_ONSET_TOLERANCES_MS, DEFAULT_TOLERANCES_MS, EvalReport,
                         PhoneClassMap, evaluate_utterance)
from .features import compute_track
from .bandpass import apply_bandpass
from .merger import ClassSegment, Segmentation
from .pipeline import segment_file
from .signal_io import load_audio, load_labels, normalize

log = logging.getLogger("broadclass")

AUDIO_EXTENSIONS = (".wav", ".sph")
LABEL_EXTENSIONS = (".phn",)
FEATURE_COLUMNS = ("hop_index", "center_time_s", "si", "pfe_ms", "ple_ms", "ade", "ade_reliable")


class UsageError(BroadClassError):
    code = "USAGE"
    exit_status = 1


class EmptyCorpus(BroadClassError):
    code = "EMPTY_CORPUS"
    exit_status = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- serialization -------------------------------------------------------

def _t(x):
    return round(float(x), 9)


def segmentation_to_dict(seg):
    return {
        "utterance_id": seg.utterance_id,
        "sample_rate": seg.sample_rate,
        "n_samples": seg.n_samples,
        "transitions": [{"kind": t.kind, "strength": t.strength, "source": t.source,
                         "time_s": _t(t.time), "sample": int(t.sample),
                         "hop_index": int(t.hop_index)} for t in seg.transitions],
        "segments": [{"label": s.label, "start_s": _t(s.start), "end_s": _t(s.end),
                      "start_sample": int(s.start_sample), "end_sample": int(s.end_sample)}
                     for s in seg.segments],
    }


def segmentation_from_dict(d):
    rate = int(d["sample_rate"])
    transitions = tuple(Transition(t["kind"], t["strength"], t["sample"] / rate, t["source"],
                                   t.get("hop_index", -1), int(t["sample"]))
                        for t in d["transitions"])
    segments = tuple(ClassSegment(s["label"], s["start_sample"] / rate, s["end_sample"] / rate,
                                  int(s["start_sample"]), int(s["end_sample"]))
                     for s in d["segments"])
    n = int(d.get("n_samples", segments[-1].end_sample if segments else 0))
    return Segmentation(d.get("utterance_id", ""), rate, n, segments, transitions)


def segmentation_json(seg):
    return json.dumps(segmentation_to_dict(seg), indent=2) + "\n"


def segmentation_lab(seg):
    return "".join(f"{s.start_sample} {s.end_sample} {s.label}\n" for s in seg.segments)


def features_csv(track):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FEATURE_COLUMNS)
    for f in track.records():
        w.writerow([f.hop_index, repr(round(f.center_time, 9)), repr(f.si),
                    "" if f.pfe_ms is None else repr(f.pfe_ms),
                    "" if f.ple_ms is None else repr(f.ple_ms),
                    "" if f.ade is None else repr(f.ade), int(f.ade_reliable)])
    return buf.getvalue()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_segmentation(seg, out_path, fmt):
    written = []
    stem = os.path.splitext(out_path)[0] if out_path not in (None, "-") else None
    if fmt in ("json", "both"):
        path = out_path if fmt == "json" or stem is None else stem + ".json"
        _write(path, segmentation_json(seg))
        written.append(path or "-")
    if fmt in ("lab", "both"):
        path = (out_path if fmt == "lab" else stem + ".lab") if stem is not None else None
        _write(path, segmentation_lab(seg))
        written.append(path or "-")
    return written


# --- corpus walking ------------------------------------------------------

def _find(root, extensions):
    """Relative paths under ``root`` with a matching extension, in sorted order."""
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            if os.path.splitext(name)[1].lower() in extensions:
                found.append(os.path.relpath(os.path.join(dirpath, name), root))
    return sorted(found)


def _key(rel):
    return os.path.splitext(rel)[0].replace(os.sep, "/").lower()


# --- subcommands ---------------------------------------------------------

def cmd_segment(audio_path, config, out_path=None, fmt=None):
    result = segment_file(audio_path, config)
    for path in _write_segmentation(result.segmentation, out_path, fmt or config.output_format):
        log.info("wrote %s", path)
    return 0


def _batch_one(job):
    root, rel, out_dir, config = job
    entry = {"input": rel.replace(os.sep, "/")}
    try:
        seg = segment_file(os.path.join(root, rel), config).segmentation
        out = os.path.join(out_dir, os.path.splitext(rel)[0] + ".json")
        outputs = _write_segmentation(seg, out, config.output_format)
        entry.update(status="ok",
                     outputs=[os.path.relpath(p, out_dir).replace(os.sep, "/") for p in outputs],
                     n_transitions=len(seg.transitions), n_segments=len(seg.segments))
    except (BroadClassError, OSError) as exc:
        code = exc.code if isinstance(exc, BroadClassError) else _io_code(exc)
        entry.update(status="error", code=code, message=str(exc))
    return entry


def _run_jobs(fn, jobs, n_jobs):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def cmd_batch(corpus_dir, config, out_dir, n_jobs=None):
    if not os.path.isdir(corpus_dir):
        raise FileNotFoundError(f"no such directory: {corpus_dir}")
    inputs = _find(corpus_dir, AUDIO_EXTENSIONS)
    if not inputs:
        raise EmptyCorpus(f"no audio files under {corpus_dir}")
    os.makedirs(out_dir, exist_ok=True)
    entries = _run_jobs(_batch_one, [(corpus_dir, rel, out_dir, config) for rel in inputs],
                        n_jobs or os.cpu_count() or 1)
    ok = sum(e["status"] == "ok" for e in entries)
    for e in entries:
        if e["status"] != "ok":
            log.warning("%s: %s %s", e["input"], e["code"], e["message"])
    index = {"n_inputs": len(entries), "n_succeeded": ok, "n_failed": len(entries) - ok,
             "files": entries}
    _write(os.path.join(out_dir, "index.json"), json.dumps(index, indent=2) + "\n")
    log.info("%d of %d files segmented", ok, len(entries))
    return 0 if ok else 3


def cmd_features(audio_path, config, out_path=None):
    u = normalize(load_audio(audio_path), os.path.splitext(os.path.basename(audio_path))[0])
    track = compute_track(u, apply_bandpass(u, config.band), config.plan)
    _write(out_path, features_csv(track))
    return 0


def _eval_one(job):
    ref_path, hyp_path, audio_path, config, pmap, tols, onset_tols, nearest_only = job
    ref = load_labels(ref_path)
    if hyp_path is not None:
        with open(hyp_path, "r", encoding="utf-8") as fh:
            seg = segmentation_from_dict(json.load(fh))
    else:
        seg = segment_file(audio_path, config).segmentation
    return evaluate_utterance(seg, ref, pmap, tols, onset_tols, nearest_only)


def evaluate_corpus(ref_dir, config, hyp_dir=None, audio_dir=None, tolerances=None,
                    phone_map=None, nearest_only=False, n_jobs=1):
    """Aggregate EvalReport over every reference file that has a hypothesis."""
    if (hyp_dir is None) == (audio_dir is None):
        raise UsageError("give exactly one of --hyp-dir or --audio-dir")
    pmap = PhoneClassMap.load(phone_map or config.phone_map or None)
    tols = tuple(tolerances) if tolerances else DEFAULT_TOLERANCES_MS
    onset_tols = tuple(tolerances) if tolerances else DEFAULT_ONSET_TOLERANCES_MS
    if not os.path.isdir(ref_dir):
        raise FileNotFoundError(f"no such directory: {ref_dir}")
    refs = _find(ref_dir, LABEL_EXTENSIONS)
    side = hyp_dir if hyp_dir is not None else audio_dir
    if not os.path.isdir(side):
        raise FileNotFoundError(f"no such directory: {side}")
    hyps = {_key(r): r for r in _find(side, (".json",) if hyp_dir else AUDIO_EXTENSIONS)}
    jobs, missing = [], []
    for rel in refs:
        other = hyps.get(_key(rel))
        if other is None:
            missing.append(rel)
            continue
        other = os.path.join(side, other)
        jobs.append((os.path.join(ref_dir, rel), other if hyp_dir else None,
                     other if audio_dir else None, config, pmap, tols, onset_tols, nearest_only))
    for rel in missing:
        log.warning("no hypothesis for %s", rel)
    if not jobs:
        raise EmptyCorpus(f"no reference/hypothesis pairs under {ref_dir}")
    report = EvalReport(tols, onset_tols)
    for part in _run_jobs(_eval_one, jobs, n_jobs):
        report = report.merge(part)
    return report


def report_text(report):
    d = report.to_dict()
    lines = [f"utterances       {d['n_utterances']}",
             f"detections       {d['n_detections']} ({d['n_insertions']} insertions, "
             f"{d['insertion_rate']:.1f}%)",
             f"boundaries       {d['n_boundaries']}"]
    if d["deviation_mean_ms"] is not None:
        lines.append(f"deviation        mean {d['deviation_mean_ms']:.2f} ms, "
                     f"std {d['deviation_std_ms']:.2f} ms")
    lines.append("accuracy         " + "  ".join(
        f"{t}ms:{v:.1f}" for t, v in d["accuracy_by_tolerance"].items()))
    for title, table in (("class distribution", d["class_distribution"]),
                         ("broad classes", d["broad_class_distribution"])):
        lines.append(f"{title} (% of duration)")
        lines.append(f"  {'':24}" + "".join(f"{lab:>7}" for lab in ("H", "L", "S", "HL", "LH")))
        for cat, row in table.items():
            lines.append(f"  {cat:24}" + "".join(f"{row[lab]:7.1f}" for lab in row))
    lines.append("onset accuracy (%)")
    for name, row in d["onset_accuracy"].items():
        cells = "  ".join(f"{t}ms:" + ("n/a" if v is None else f"{v:.1f}") for t, v in row.items())
        lines.append(f"  {name:30} n={d['onset_counts'][name]:<6} {cells}")
    return "\n".join(lines) + "\n"


def report_csv(report):
    d = report.to_dict()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("metric", "key", "value"))
    for k in ("n_utterances", "n_detections", "n_matched", "n_insertions", "n_boundaries",
              "deviation_mean_ms", "deviation_std_ms", "insertion_rate"):
        w.writerow((k, "", "" if d[k] is None else d[k]))
    for t, v in d["accuracy_by_tolerance"].items():
        w.writerow(("accuracy", f"{t}ms", v))
    for section in ("class_distribution", "broad_class_distribution"):
        for cat, row in d[section].items():
            for lab, v in row.items():
                w.writerow((section, f"{cat}/{lab}", v))
    for name, row in d["onset_accuracy"].items():
        for t, v in row.items():
            w.writerow(("onset_accuracy", f"{name}/{t}ms", "" if v is None else v))
    return buf.getvalue()


def histogram_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("bin_start_ms", "count"))
    w.writerows(report.histogram)
    return buf.getvalue()


def cmd_eval(args, config):
    report = evaluate_corpus(args.ref_dir, config, args.hyp_dir, args.audio_dir,
                             args.tolerances, args.phone_map, args.nearest_only,
                             args.jobs or os.cpu_count() or 1)
    render = {"json": lambda r: json.dumps(r.to_dict(), indent=2) + "\n",
              "csv": report_csv, "text": report_text}[args.report]
    _write(args.output, render(report))
    if args.histogram:
        _write(args.histogram, histogram_csv(report))
    return 0


# --- entry point ---------------------------------------------------------

def _tolerances(text):
    try:
        values = [int(v) if float(v).is_integer() else float(v)
                  for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance list {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return sorted(set(values))


def build_parser():
    p = _Parser(prog="broadclass", description="Broad phonetic class segmentation.")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--verbose", "-v", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("segment", help="segment one audio file")
    s.add_argument("audio")
    s.add_argument("-o", "--output", help="output path (default: stdout)")
    s.add_argument("--format", choices=("json", "lab", "both"))

    b = sub.add_parser("batch", help="segment every audio file under a directory")
    b.add_argument("corpus_dir")
    b.add_argument("out_dir")
    b.add_argument("--jobs", "-j", type=int, help="worker processes (default: CPU count)")

    f = sub.add_parser("features", help="per-hop feature CSV")
    f.add_argument("audio")
    f.add_argument("-o", "--output", help="CSV path (default: stdout)")

    e = sub.add_parser("eval", help="score segmentations against phone labels")
    e.add_argument("--ref-dir", required=True)
    grp = e.add_mutually_exclusive_group(required=True)
    grp.add_argument("--hyp-dir")
    grp.add_argument("--audio-dir")
    e.add_argument("--tolerances", type=_tolerances, help="comma-separated ms, e.g. 10,20")
    e.add_argument("--phone-map")
    e.add_argument("--report", choices=("json", "csv", "text"), default="json")
    e.add_argument("-o", "--output", help="report path (default: stdout)")
    e.add_argument("--histogram", help="deviation histogram CSV path")
    e.add_argument("--nearest-only", action="store_true",
                   help="a detection may only match its own nearest boundary")
    e.add_argument("--jobs", "-j", type=int)
    return p


def _io_code(exc):
    return "IO_NOT_FOUND" if isinstance(exc, FileNotFoundError) else "IO_ERROR"


def _fail(code, status, message):
    sys.stderr.write(f"broadclass: error: {code}: {message}\n")
    return status


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="broadclass: %(levelname)s: %(message)s", stream=sys.stderr)
        config = load_config(args.config) if args.config else Config()
        log.info("kernel backend: %s", _backend.NAME)
        if args.command == "segment":
            return cmd_segment(args.audio, config, args.output, args.format)
        if args.command == "batch":
            return cmd_batch(args.corpus_dir, config, args.out_dir, args.jobs)
        if args.command == "features":
            return cmd_features(args.audio, config, args.output)
        return cmd_eval(args, config)
    except BroadClassError as exc:
        return _fail(exc.code, exc.exit_status, exc)
    except OSError as exc:
        return _fail(_io_code(exc), 2, exc)
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        return _fail("INTERNAL", 4, f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
