"""Independent reference implementations used only by the tests.

Written with plain Python loops and scalars so they share no code path with
the vectorised library versions they check.
"""

import math


def scalar_sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def scalar_act(x, kind):
    return math.tanh(x) if kind == "tanh" else max(x, 0.0)


def lstm_scalar(W_x, W_h, b, seq, kind):
    """Step-by-step LSTM over one sequence using nested loops.

    W_x[k][j] weights input k into gate column j; columns are laid out as
    [input | forget | output | candidate], each ``hidden`` wide.
    """
    hidden = len(W_h)
    h = [0.0] * hidden
    c = [0.0] * hidden
    out = []
    for x in seq:
        z = []
        for j in range(4 * hidden):
            s = b[j]
            for k, xv in enumerate(x):
                s += xv * W_x[k][j]
            for k, hv in enumerate(h):
                s += hv * W_h[k][j]
            z.append(s)
        new_h, new_c = [], []
        for u in range(hidden):
            i = scalar_sigmoid(z[u])
            f = scalar_sigmoid(z[hidden + u])
            o = scalar_sigmoid(z[2 * hidden + u])
            g = scalar_act(z[3 * hidden + u], kind)
            cu = f * c[u] + i * g
            new_c.append(cu)
            new_h.append(o * scalar_act(cu, kind))
        h, c = new_h, new_c
        out.append(list(h))
    return out


def brute_force_label(winds, threshold=30, span=4, rule="any_span", strict=False):
    """Enumerate every (i, j) pair with j - i == span and test the rise."""
    n = len(winds)
    hit = False
    for i in range(n):
        for j in range(n):
            if j - i != span:
                continue
            if rule == "last_anchored" and j != n - 1:
                continue
            rise = winds[j] - winds[i]
            if (rise > threshold) if strict else (rise >= threshold):
                hit = True
    return 1 if hit else 0


def brute_force_windows(winds, n, stride=1, **kw):
    labels = []
    start = 0
    while start + n <= len(winds):
        labels.append(brute_force_label(winds[start:start + n], **kw))
        start += stride
    return labels


def brute_force_confusion(preds, labels):
    tp = fp = tn = fn = 0
    for p, t in zip(preds, labels):
        if p == 1 and t == 1:
            tp += 1
        elif p == 1 and t == 0:
            fp += 1
        elif p == 0 and t == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def brute_force_report(preds, labels):
    """Per-class and aggregate metrics computed from scratch for each class."""
    def prf(pos):
        tp = sum(1 for p, t in zip(preds, labels) if p == pos and t == pos)
        pp = sum(1 for p in preds if p == pos)
        ap = sum(1 for t in labels if t == pos)
        prec = tp / pp if pp else 0.0
        rec = tp / ap if ap else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        return prec, rec, f1

    ri = prf(1)
    non = prf(0)
    w1 = sum(1 for t in labels if t == 1) / len(labels)
    w2 = 1.0 - w1
    mp, mr = (ri[0] + non[0]) / 2, (ri[1] + non[1]) / 2
    wp, wr = w1 * ri[0] + w2 * non[0], w1 * ri[1] + w2 * non[1]
    hm = lambda a, b: 2 * a * b / (a + b) if a + b else 0.0
    return {
        "ri": ri, "non_ri": non,
        "macro": (mp, mr, hm(mp, mr)),
        "weighted": (wp, wr, hm(wp, wr)),
    }


def central_difference(f, params, h=1e-5):
    """Numerical gradient of scalar f(params) for every entry of every array."""
    grads = {}
    for name, arr in params.items():
        g = arr.copy() * 0.0
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            up = f(params)
            flat[idx] = orig - h
            down = f(params)
            flat[idx] = orig
            gflat[idx] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def max_relative_error(analytic, numeric, floor=1e-6):
    worst = 0.0
    for name in analytic:
        a = analytic[name].reshape(-1)
        n = numeric[name].reshape(-1)
        for av, nv in zip(a, n):
            err = abs(av - nv) / max(abs(av), abs(nv), floor)
            worst = max(worst, err)
    return worst


def random_gradcheck_case(rng):
    """Draw one (spec, params, x, y) case for a finite-difference comparison."""
    from cyclone_ri.nn import init_params
    from cyclone_ri.nn.network import Loss, NetworkSpec

    hidden = int(rng.integers(1, 9))
    steps = int(rng.integers(1, 7))
    inputs = int(rng.integers(1, 4))
    batch = int(rng.integers(1, 5))
    loss = Loss.CROSS_ENTROPY if rng.random() < 0.5 else Loss.MSE
    activation = "tanh" if rng.random() < 0.5 else "relu"
    outputs = 2 if loss is Loss.CROSS_ENTROPY else int(rng.integers(1, 13))
    spec = NetworkSpec(input_size=inputs, output_size=outputs, hidden_size=hidden, loss=loss, activation=activation)
    params = init_params(spec, int(rng.integers(1 << 30)))
    # random biases so no unit sits exactly on the ReLU kink
    params["b"] = params["b"] + rng.normal(0, 0.3, params["b"].shape)
    params["b_out"] = rng.normal(0, 0.3, params["b_out"].shape)
    x = rng.normal(0, 1, (batch, steps, inputs))
    if loss is Loss.CROSS_ENTROPY:
        y = rng.integers(0, 2, batch)
    else:
        y = rng.normal(0, 1, (batch, outputs))
    return spec, params, x, y


def gradcheck(spec, params, x, y, h=1e-5, floor=1e-6):
    """Max relative error between BPTT gradients and central differences."""
    from cyclone_ri.nn.network import loss_and_grads

    _, analytic = loss_and_grads(spec, params, x, y)
    work = {k: v.copy() for k, v in params.items()}
    numeric = central_difference(lambda p: loss_and_grads(spec, p, x, y)[0], work, h)
    return max_relative_error(analytic, numeric, floor)
