#include "padtrack/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "padtrack/rng.hpp"
#include "padtrack/text.hpp"

namespace padtrack::transfer {

void TransferConfig::validate() const {
    if (!(eta_weight > 0.0)) throw ValidationError("transfer: eta_weight must be positive");
    if (!(schedule_m > 0.0)) throw ValidationError("transfer: schedule_m must be positive");
    if (target_budget < 1) throw ValidationError("transfer: target budget must be positive");
    if (epoch_switch < 0) throw ValidationError("transfer: epoch_switch must be >= 0");
    for (double k : kernel_multipliers)
        if (!(k > 0.0)) throw ValidationError("transfer: kernel multipliers must be positive");
}

namespace {

double kernel_mean(double x, double y, std::span<const double> bandwidths) {
    double acc = 0.0;
    const double d2 = (x - y) * (x - y);
    for (double b : bandwidths) acc += std::exp(-d2 / (2.0 * b * b));
    return acc / static_cast<double>(bandwidths.size());
}

} // namespace

double mmd(std::span<const double> a, std::span<const double> b,
           std::span<const double> bandwidths, bool unbiased) {
    if (a.size() < 2 || b.size() < 2) throw ValidationError("mmd: need at least 2 samples per side");
    if (bandwidths.empty()) throw ValidationError("mmd: no bandwidths");
    for (double bw : bandwidths)
        if (!(bw > 0.0)) throw ValidationError("mmd: degenerate bandwidth");

    const double m = static_cast<double>(a.size());
    const double n = static_cast<double>(b.size());

    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (unbiased && i == j) continue;
            saa += kernel_mean(a[i], a[j], bandwidths);
        }
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (unbiased && i == j) continue;
            sbb += kernel_mean(b[i], b[j], bandwidths);
        }
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) sab += kernel_mean(a[i], b[j], bandwidths);

    if (unbiased)
        return saa / (m * (m - 1.0)) - 2.0 * sab / (m * n) + sbb / (n * (n - 1.0));
    return saa / (m * m) - 2.0 * sab / (m * n) + sbb / (n * n);
}

std::vector<double> mmd_bandwidths(std::span<const double> a, std::span<const double> b,
                                   std::span<const double> multipliers) {
    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    if (pooled.size() < 2) throw ValidationError("mmd_bandwidths: need at least 2 samples");

    std::vector<double> dists;
    dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
    for (std::size_t i = 0; i < pooled.size(); ++i)
        for (std::size_t j = i + 1; j < pooled.size(); ++j)
            dists.push_back(std::abs(pooled[i] - pooled[j]));
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                     dists.end());
    const double base = std::max(dists[dists.size() / 2], 1e-9);

    std::vector<double> out;
    out.reserve(multipliers.size());
    for (double mlt : multipliers) out.push_back(base * mlt);
    return out;
}

void mmd_gradients(std::span<const double> a, std::span<const double> b,
                   std::span<const double> bandwidths, std::span<double> da, std::span<double> db,
                   bool unbiased) {
    if (da.size() != a.size() || db.size() != b.size())
        throw ValidationError("mmd_gradients: output size mismatch");
    const double m = static_cast<double>(a.size());
    const double n = static_cast<double>(b.size());
    const double nb = static_cast<double>(bandwidths.size());
    const double self_a = unbiased ? m * (m - 1.0) : m * m;
    const double self_b = unbiased ? n * (n - 1.0) : n * n;

    // d/dx exp(-(x-y)^2 / (2 b^2)) = -(x-y)/b^2 * exp(...); zero at x = y, so
    // the i = j terms drop out on their own.
    auto dkernel = [&](double x, double y) {
        double acc = 0.0;
        const double diff = x - y;
        for (double bw : bandwidths) acc += -(diff / (bw * bw)) * std::exp(-diff * diff / (2.0 * bw * bw));
        return acc / nb;
    };

    std::fill(da.begin(), da.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) acc += 2.0 * dkernel(a[i], a[j]);  // both sum slots
        da[i] += acc / self_a;
        acc = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) acc += dkernel(a[i], b[j]);
        da[i] -= 2.0 * acc / (m * n);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) acc += 2.0 * dkernel(b[j], b[i]);
        db[j] += acc / self_b;
        acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += -dkernel(a[i], b[j]);
        db[j] -= 2.0 * acc / (m * n);
    }
}

double lambda_schedule(long long iteration, int epoch, double m, int epoch_switch) {
    if (iteration < 0) throw ValidationError("lambda_schedule: iteration must be >= 0");
    if (!(m > 0.0)) throw ValidationError("lambda_schedule: m must be positive");
    const double denom = (epoch < epoch_switch) ? m : m / 10.0;
    return 2.0 / (1.0 + std::exp(-10.0 * static_cast<double>(iteration) / denom)) - 1.0;
}

double total_loss(double mse, double mmd_value, double eta_weight, double lambda) {
    if (!std::isfinite(mse) || !std::isfinite(mmd_value))
        throw NumericError("total_loss: non-finite inputs");
    return mse + eta_weight * lambda * mmd_value;
}

std::vector<std::size_t> select_source(const std::vector<entropy::EntropyRanking>& source_rankings,
                                       const entropy::EntropyRanking& target_ranking) {
    if (target_ranking.order.size() < 2)
        throw ValidationError("select_source: target ranking needs at least 2 channels");
    const int t0 = target_ranking.order[0];
    const int t1 = target_ranking.order[1];

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < source_rankings.size(); ++i) {
        const auto& ord = source_rankings[i].order;
        if (ord.size() < 2) throw ValidationError("select_source: source ranking needs at least 2 channels");
        if (ord[0] == t0 || ord[0] == t1 || ord[1] == t0 || ord[1] == t1) out.push_back(i);
    }
    if (out.empty())
        throw ValidationError(
            "select_source: no source placement shares a low-entropy channel with the target; "
            "fall back to all placements (--all-sources)");
    return out;
}

std::pair<lstm::ModelParams, TransferReport> transfer_fit(lstm::ModelParams params,
                                                          std::span<const core::Window> source,
                                                          std::span<const core::Window> target,
                                                          const TransferConfig& cfg,
                                                          const FitOptions& opt) {
    cfg.validate();
    if (source.empty()) throw ValidationError("transfer_fit: empty source pool");
    if (target.size() < 2) throw ValidationError("transfer_fit: need at least 2 target windows");
    if (target.size() > static_cast<std::size_t>(cfg.target_budget))
        throw ValidationError("transfer_fit: target windows exceed the budget of " +
                              fmt(static_cast<std::int64_t>(cfg.target_budget)));
    if (opt.epochs < 1 || opt.batch < 2) throw ValidationError("transfer_fit: bad fit options");

    TransferReport report;
    Rng rng(hash_combine(opt.seed, 0x7fa25ULL));

    std::vector<std::size_t> src_order(source.size());
    std::iota(src_order.begin(), src_order.end(), 0);
    std::vector<std::size_t> tgt_order(target.size());
    std::iota(tgt_order.begin(), tgt_order.end(), 0);

    std::vector<core::Window> sbatch, tbatch;
    std::vector<double> stargets;
    std::vector<double> mults(cfg.kernel_multipliers.begin(), cfg.kernel_multipliers.end());

    long long iteration = 0;
    std::size_t tgt_cursor = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(src_order);
        double mse_sum = 0.0, mmd_sum = 0.0, lambda_last = 0.0;
        std::size_t batches = 0, samples = 0;

        for (std::size_t begin = 0; begin < src_order.size(); begin += static_cast<std::size_t>(opt.batch)) {
            const std::size_t end = std::min(src_order.size(), begin + static_cast<std::size_t>(opt.batch));
            if (end - begin < 2) break;  // MMD needs two source predictions
            sbatch.clear();
            stargets.clear();
            for (std::size_t k = begin; k < end; ++k) {
                sbatch.push_back(source[src_order[k]]);
                if (!sbatch.back().target) throw ValidationError("transfer_fit: source window without target");
                stargets.push_back(*sbatch.back().target);
            }

            // cycle through the target pool in shuffled order
            tbatch.clear();
            const std::size_t tcount = std::min<std::size_t>(target.size(), end - begin);
            for (std::size_t k = 0; k < tcount; ++k) {
                if (tgt_cursor == 0) rng.shuffle(tgt_order);
                tbatch.push_back(target[tgt_order[tgt_cursor]]);
                tgt_cursor = (tgt_cursor + 1) % tgt_order.size();
            }

            const double lambda = lambda_schedule(iteration, epoch, cfg.schedule_m, cfg.epoch_switch);
            ++iteration;

            const std::vector<double> spred = lstm::forward_batch(params, sbatch);
            const std::vector<double> tpred = lstm::forward_batch(params, tbatch);
            const double mse = lstm::mse_loss(spred, stargets);
            const std::vector<double> bws = mmd_bandwidths(spred, tpred, mults);
            const double mmd_value = mmd(spred, tpred, bws, cfg.unbiased);
            if (!std::isfinite(total_loss(mse, mmd_value, cfg.eta_weight, lambda)))
                throw NumericError("transfer_fit: diverged at epoch " + fmt(static_cast<std::int64_t>(epoch)));

            // dL/dy for both pools; lambda = 0 contributes exactly nothing
            std::vector<double> ds(spred.size()), dt(tpred.size());
            const double n_src = static_cast<double>(spred.size());
            for (std::size_t i = 0; i < spred.size(); ++i)
                ds[i] = 2.0 * (spred[i] - stargets[i]) / n_src;
            if (lambda > 0.0) {
                std::vector<double> dmmd_s(spred.size()), dmmd_t(tpred.size());
                mmd_gradients(spred, tpred, bws, dmmd_s, dmmd_t, cfg.unbiased);
                const double w = cfg.eta_weight * lambda;
                for (std::size_t i = 0; i < ds.size(); ++i) ds[i] += w * dmmd_s[i];
                for (std::size_t i = 0; i < dt.size(); ++i) dt[i] = w * dmmd_t[i];
            }

            lstm::BackwardResult bs = lstm::backward_outputs(params, sbatch, ds);
            if (lambda > 0.0) {
                lstm::BackwardResult bt = lstm::backward_outputs(params, tbatch, dt);
                for (std::size_t k = 0; k < bs.grads.size(); ++k) bs.grads[k] += bt.grads[k];
            }
            lstm::clip_gradients(bs.grads, opt.grad_clip);
            for (std::size_t k = 0; k < params.w.size(); ++k) params.w[k] -= opt.learning_rate * bs.grads[k];

            mse_sum += mse * static_cast<double>(end - begin);
            mmd_sum += mmd_value;
            lambda_last = lambda;
            ++batches;
            samples += end - begin;
        }
        if (batches == 0) throw ValidationError("transfer_fit: source pool smaller than one batch");
        report.epochs.push_back({epoch, mse_sum / static_cast<double>(samples),
                                 mmd_sum / static_cast<double>(batches), lambda_last});
    }
    report.iterations = iteration;
    if (!params.finite()) throw NumericError("transfer_fit: diverged (non-finite parameters)");
    return {std::move(params), std::move(report)};
}

} // namespace padtrack::transfer
