// Minimum molecule count for 90% reception across a few deployment radii,
// next to a Monte Carlo check of the analytic success probability.

#include <cstdio>

#include "molcomm/molcomm.hpp"

int main()
{
    using namespace molcomm;

    const auto channel = ChannelParams::free_diffusion(1.0, 1e-9, 100.0);
    const ReceptionRule rule{1e4, 0.9}; // 0.01 molecules per mm^2

    std::printf("radius_mm  molecules  analytic  monte_carlo\n");
    for (const auto& entry : radius_sweep(rule, channel, {1.1e-3, 1.2e-3, 1.3e-3, 1.4e-3}))
    {
        if (!entry.molecules)
        {
            std::printf("%9.2f  failed: %s\n", entry.radius * 1e3, entry.error.c_str());
            continue;
        }
        const auto tuned = channel.with_molecules(*entry.molecules);
        const DiskRegion region(entry.radius);
        const double analytic = success_probability(rule, SignalDistribution(tuned, region));
        const auto emp = simulate(tuned, region, default_sample_count, 7);
        std::printf("%9.2f  %9.2f  %8.4f  %11.4f\n", entry.radius * 1e3, *entry.molecules, analytic,
                    exceedance_fraction(emp, rule.threshold));
    }
}
