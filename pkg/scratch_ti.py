"""Probe both pairings for the constant-refinement comparison. Delete before final run."""
import numpy as np

from dhtexp import (
    Alphabet,
    BcDiffAux,
    BcLabeling,
    Channel,
    HypothesisProblem,
    InfeasibleError,
    JointPmf,
    bc_diff_region,
)

AX = Alphabet
gb = np.array([[0.9, 0.1], [0.1, 0.9]])


def split_rho_problem(seed, nx, ny1, ny2, nw, nv1, nv2):
    rng = np.random.default_rng(seed)
    rho = rng.random(nx) + 0.3
    rho /= rho.sum()
    sig = rng.random(nx) + 0.1
    sig /= sig.sum()

    def cond():
        w = rng.random((nx, ny1, ny2)) + 0.05
        return w / w.sum(axis=(1, 2), keepdims=True)

    p = JointPmf((AX("X", nx), AX("Y1", ny1), AX("Y2", ny2)), rho[:, None, None] * cond())
    q = JointPmf((AX("X", nx), AX("Y1", ny1), AX("Y2", ny2)), sig[:, None, None] * cond())
    gk = rng.random((nw, nv1, nv2)) + 0.05
    gk /= gk.sum(axis=(1, 2), keepdims=True)
    ch = Channel((AX("W", nw),), (AX("V1", nv1), AX("V2", nv2)), gk)
    return HypothesisProblem(p, q, ch, "BC")


def rand_diff_aux(seed, nx, ns, nw, sharp=0.25):
    rng = np.random.default_rng(seed)

    def rows(shape):
        w = rng.random(shape) + 0.3
        return w / w.sum(axis=-1, keepdims=True)

    def quant():
        base = rows((nx, ns))
        u = np.full((nx, ns), 1.0 / ns)
        return (1 - sharp) * u + sharp * base

    pt = rng.random(nw) + 0.3
    pt /= pt.sum()
    return BcDiffAux(
        Channel((AX("X", nx),), (AX("S", ns),), quant()),
        Channel((AX("X", nx),), (AX("S", ns),), quant()),
        JointPmf((AX("T", nw),), pt),
        Channel((AX("T", nw),), (AX("T1", nw),), rows((nw, nw))),
        Channel((AX("T", nw),), (AX("T2", nw),), rows((nw, nw))),
        Channel((AX("T", nw), AX("T1", nw)), (AX("W", nw),), rows((nw, nw, nw))),
        Channel((AX("T", nw), AX("T2", nw)), (AX("W", nw),), rows((nw, nw, nw))))


def collapse(aux, receiver, t0, mode):
    """Constant-T_i variant of aux for one receiver.

    mode "chain": codeword kernel row at t0 becomes the T_i-average of the
    active kernel, so the (T, W) law is preserved.
    mode "same": codeword kernel untouched; only row t0 of it stays in play.
    """
    nw = aux.p_t.probs.size
    kt = np.zeros((nw, nw))
    kt[:, t0] = 1.0
    if receiver == 1:
        kw = aux.p_w1_given_t.kernel
        k_ref = aux.p_t1_given_t.kernel
    else:
        kw = aux.p_w2_given_t.kernel
        k_ref = aux.p_t2_given_t.kernel
    if mode == "chain":
        kw = kw.copy()
        kw[:, t0, :] = np.einsum("ab,abw->aw", k_ref, aux.p_w1_given_t.kernel
                                 if receiver == 1 else aux.p_w2_given_t.kernel)
    kt_ch = Channel((AX("T", nw),), (AX(f"T{receiver}", nw),), kt)
    kw_ch = Channel((AX("T", nw), AX(f"T{receiver}", nw)), (AX("W", nw),), kw)
    if receiver == 1:
        return BcDiffAux(aux.p_s1_given_x, aux.p_s2_given_x, aux.p_t,
                         kt_ch, aux.p_t2_given_t, kw_ch, aux.p_w2_given_t)
    return BcDiffAux(aux.p_s1_given_x, aux.p_s2_given_x, aux.p_t,
                     aux.p_t1_given_t, kt_ch, aux.p_w1_given_t, kw_ch)


lab = BcLabeling(0, 1)
rows = []
for trial in range(12):
    base = split_rho_problem(400 + trial, 2, 2, 2, 2, 2, 2)
    gkD = gb[:, :, None] * gb[:, None, :]
    prob = HypothesisProblem(
        base.p, base.q,
        Channel((AX("W", 2),), (AX("V1", 2), AX("V2", 2)), gkD), "BC")
    aux = rand_diff_aux(600 + trial, 2, 2, 2, sharp=0.6)
    try:
        reg_a = bc_diff_region(prob, lab, aux)
    except InfeasibleError as exc:
        print(f"trial {trial}: active infeasible ({exc})")
        continue
    for i in (1, 2):
        ca = reg_a.components["cross"][i - 1]
        if not np.isfinite(ca):
            print(f"trial {trial} r{i}: cross inf, skip")
            continue
        for mode in ("chain", "same"):
            for t0 in (0, 1):
                try:
                    reg_c = bc_diff_region(prob, lab, collapse(aux, i, t0, mode))
                except InfeasibleError:
                    print(f"trial {trial} r{i} {mode} t0={t0}: const infeasible")
                    continue
                cc = reg_c.components["cross"][i - 1]
                rows.append((trial, i, mode, t0, ca, cc, cc - ca))
                flag = "VIOLATES active<=const" if cc < ca - 1e-9 else ""
                print(f"trial {trial} r{i} {mode} t0={t0}: "
                      f"active={ca:.6f} const={cc:.6f} diff={cc - ca:+.6f} {flag}")

chain = [r for r in rows if r[2] == "chain"]
same = [r for r in rows if r[2] == "same"]
print("\nchain pairing: const - active  min %.6f  max %.6f  (n=%d)"
      % (min(r[6] for r in chain), max(r[6] for r in chain), len(chain)))
print("same  pairing: const - active  min %.6f  max %.6f  (n=%d)"
      % (min(r[6] for r in same), max(r[6] for r in same), len(same)))
