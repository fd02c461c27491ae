# SPDX-License-Identifier: MIT OR Apache-2.0
"""Smoke test for the ccx extension module.

Build and run:

    cargo build -p ccx-py
    cp target/debug/libccx.so python/ccx.so
    python3 python/smoke_test.py
"""

import json
import sys


def main() -> int:
    import ccx

    print(f"ccx {ccx.__version__}")

    # Bundled documents load and round-trip through the parser.
    names = ccx.corpus_names()
    assert "pr-box" in names and "bell-dag" in names, names
    pr = ccx.Phenomenon.from_json(ccx.corpus_text("pr-box"))
    assert json.loads(pr.to_json())["kind"] == "phenomenon"

    # The extremal box: no-disturbance holds, membership fails with the
    # exact 4-vs-2 witness, so no faithful classical model exists.
    assert pr.no_disturbance_violations() == []
    cert = pr.factorisable()
    assert not cert.feasible
    assert cert.witness == ("4", "2"), cert.witness
    assert pr.classify().startswith("fine-tuning-required"), pr.classify()
    print("pr-box:", pr.classify())

    # White noise sits inside the polytope with exact weights.
    chsh = ccx.Scenario.chsh()
    noise = ccx.Phenomenon(chsh, [["1/4"] * 4] * 4)
    cert = noise.factorisable()
    assert cert.feasible
    total = sum(int(w.split("/")[0]) / int(w.split("/")[1]) if "/" in w else int(w)
                for w in cert.weights)
    assert abs(total - 1.0) < 1e-12
    print("uniform noise: factorisable,", sum(1 for w in cert.weights if w != "0"),
          "strategies in support")

    # d-separation on the common-cause graph.
    g = ccx.Graph.from_json(ccx.corpus_text("bell-dag"))
    assert g.d_separated(["A1"], ["X2"], ["X1"])
    assert not g.d_separated(["A1"], ["A2"], ["X1", "X2"])
    print("bell-dag d-separation queries: ok")

    # Faithfulness: the generic common-cause model is clean, the
    # hidden-edge model is caught with a concrete witness.
    model = ccx.Model.from_json(ccx.corpus_text("bell-dag"))
    own = ccx.Phenomenon.from_json(ccx.corpus_text("bell-dag-phenomenon"))
    assert model.fine_tuning_witnesses(own) == []
    hidden = ccx.Model.from_json(ccx.corpus_text("prbox-hidden-edge"))
    witnesses = hidden.fine_tuning_witnesses(pr)
    assert any("A1" in w and "X2" in w for w in witnesses), witnesses
    print("faithfulness checks: ok,", len(witnesses), "witnesses on the hidden-edge model")

    # A random model on the graph projects to a no-disturbance phenomenon.
    rnd = ccx.Model.random(g, [2, 2, 2, 2, 4], seed=13)
    ph = rnd.observable_phenomenon(chsh)
    assert ph.no_disturbance_violations() == []
    assert ph.factorisable().feasible
    print("random common-cause model: no-disturbance and factorisable")

    # The full command-line surface is callable in process.
    code, out = ccx.run_cli(["corollary", "corpus:ghz-mermin"])
    assert code == 0 and "fine-tuning required" in out
    print("cli corollary on ghz-mermin: ok")

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
