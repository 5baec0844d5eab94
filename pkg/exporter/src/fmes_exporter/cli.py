import argparse
import sys
from pathlib import Path

from .backends import ModelLoadError
from .export import ExportJob, export


def main(argv=None):
    ap = argparse.ArgumentParser(prog="fmes-export",
                                 description="dump CLIP embeddings to an FMES store")
    ap.add_argument("--model", required=True, help="checkpoint tag or local path")
    ap.add_argument("--templates", required=True, help="template file, one per line")
    ap.add_argument("--classes", required=True, help="class file, one name per line")
    ap.add_argument("--images", required=True,
                    help="image root with one subfolder per class")
    ap.add_argument("--out", required=True, help="output FMES path")
    ap.add_argument("--device", default="cpu")
    ap.add_argument("--batch-size", type=int, default=32)
    args = ap.parse_args(argv)

    job = ExportJob(model_tag=args.model, template_file=Path(args.templates),
                    class_file=Path(args.classes), image_root=Path(args.images),
                    out_path=Path(args.out), device=args.device,
                    batch_size=args.batch_size)
    try:
        report = export(job)
    except (ModelLoadError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for line in report.skipped:
        print(f"skipped {line}", file=sys.stderr)
    print(f"wrote {args.out}: T={report.n_templates} K={report.n_classes} "
          f"N={report.n_images} ({len(report.skipped)} skipped)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
