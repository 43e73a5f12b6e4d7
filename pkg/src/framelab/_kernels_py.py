"""Pure-numpy fallbacks with the same signatures as the compiled kernels."""

import numpy as np


def jacobi_eigh(a_in, rel_tol=1e-13, max_sweeps=100):
    a = np.array(a_in, dtype=np.float64, copy=True)
    d = a.shape[0]
    v = np.eye(d)
    thresh = rel_tol * np.sqrt(np.sum(a * a))
    sweep = 0
    while sweep < max_sweeps:
        # summed directly: subtracting the diagonal from the total cancels badly
        off = 2.0 * np.sum(np.triu(a, 1) ** 2)
        if np.sqrt(off) <= thresh:
            break
        sweep += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diagonal(a).copy(), v, sweep


def gram_deviation(x, target, denom, out):
    dev = (x.T @ x) / denom - target
    np.multiply(dev, dev, out=out)
    return float(out.sum())


def hermitian_gram_deviation(re, im, target, denom, out):
    cr = re.T @ re + im.T @ im
    ci = im.T @ re - re.T @ im
    dr = cr / denom - target
    np.copyto(out, dr * dr + (ci / denom) ** 2)
    return float(out.sum())
