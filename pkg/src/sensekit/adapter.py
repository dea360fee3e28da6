"""Reference HTTP adapter for the verification-scorer wire protocol.

Wraps any ``(context, gloss) -> (true_confidence, false_confidence)``
callable behind the POST protocol the remote scorer client speaks: a
single ``{"context", "gloss"}`` object returns one ``{"true", "false"}``
object; an array returns an order-aligned array.

Run ``python -m sensekit.adapter --model <checkpoint>`` to serve a binary
sequence-classification transformer checkpoint (the heavy import happens
only then), or ``--constant 0.7,0.3`` for a smoke-test stub.
"""

from __future__ import annotations

import argparse
from typing import Callable

from fastapi import FastAPI, HTTPException, Request

ScoreFn = Callable[[str, str], tuple[float, float]]


def create_adapter_app(score_fn: ScoreFn, name: str = "tsv-adapter") -> FastAPI:
    app = FastAPI(title=name)

    @app.post("/")
    async def score(request: Request):
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be JSON") from None
        single = isinstance(payload, dict)
        items = [payload] if single else payload
        if not isinstance(items, list):
            raise HTTPException(status_code=400, detail="body must be an object or array")
        results = []
        for item in items:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("context"), str)
                or not isinstance(item.get("gloss"), str)
            ):
                raise HTTPException(
                    status_code=400,
                    detail="each item needs string 'context' and 'gloss' fields",
                )
            true_confidence, false_confidence = score_fn(item["context"], item["gloss"])
            results.append({"true": true_confidence, "false": false_confidence})
        return results[0] if single else results

    return app


def transformers_score_fn(model_path: str, device: str = "cpu") -> ScoreFn:
    """Wrap a binary sequence-classification checkpoint as a score function.

    The positive ("same meaning") label is found through ``id2label`` when
    the config names one of true/yes/positive/1; otherwise label index 1 is
    taken as positive.
    """
    import torch  # deferred: heavy optional dependency
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_path)
    model = AutoModelForSequenceClassification.from_pretrained(model_path)
    model.to(device)
    model.eval()

    positive_index = 1
    id2label = getattr(model.config, "id2label", None) or {}
    for index, label in id2label.items():
        if str(label).lower() in ("true", "yes", "positive", "1", "label_1"):
            positive_index = int(index)
            break

    def score(context: str, gloss: str) -> tuple[float, float]:
        encoded = tokenizer(
            context, gloss, return_tensors="pt", truncation=True, max_length=512
        ).to(device)
        with torch.no_grad():
            logits = model(**encoded).logits[0]
        probabilities = torch.softmax(logits, dim=-1).tolist()
        true_confidence = float(probabilities[positive_index])
        false_confidence = float(probabilities[1 - positive_index])
        return true_confidence, false_confidence

    return score


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="transformer checkpoint path or hub id")
    group.add_argument(
        "--constant",
        help="serve fixed 'true,false' confidences (smoke-test stub)",
    )
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8090)
    args = parser.parse_args(argv)

    if args.constant:
        true_confidence, false_confidence = (
            float(part) for part in args.constant.split(",")
        )

        def score_fn(context: str, gloss: str) -> tuple[float, float]:
            return true_confidence, false_confidence

    else:
        score_fn = transformers_score_fn(args.model, args.device)

    import uvicorn

    uvicorn.run(create_adapter_app(score_fn), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
