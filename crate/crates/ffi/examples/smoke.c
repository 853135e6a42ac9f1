#include "skewlab.h"
#include <assert.h>
#include <math.h>
#include <stdio.h>

int main(void) {
    SkewlabDomain *domain = NULL;
    assert(skewlab_domain_new(1, false, &domain) == SkewlabStatus_Ok);

    double z[2] = {0.9, 0.0};
    double delta = 0.0;
    assert(skewlab_boundary_distance(domain, z, 2, &delta) == SkewlabStatus_Ok);
    assert(fabs(delta - 0.19) < 1e-15);

    SkewlabMeasure *mu = NULL;
    assert(skewlab_measure_radial(domain, 0.5, 1.0, &mu) == SkewlabStatus_Ok);
    SkewlabVerdict verdict;
    double slope;
    assert(skewlab_classify(domain, mu, 1.0, 0.0, 0.5, 0.1, &verdict, &slope) == SkewlabStatus_Ok);
    assert(verdict == SkewlabVerdict_Vanishing);
    assert(fabs(slope - 0.5) < 0.1);

    double lambda, gamma, theta;
    int h1, h2;
    assert(skewlab_derive_params(1, 2.0, 0.0, 2.0, 0.0, 1.0,
                                 &lambda, &gamma, &theta, &h1, &h2) == SkewlabStatus_Ok);
    assert(fabs(lambda - 1.0) < 1e-15 && fabs(gamma - 1.0) < 1e-15 && h1 && h2);

    skewlab_measure_free(mu);
    skewlab_domain_free(domain);
    printf("c smoke test passed: version %s\n", skewlab_version());
    return 0;
}
