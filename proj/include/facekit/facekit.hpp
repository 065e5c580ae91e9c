#pragma once

#include "facekit/dataset.hpp"
#include "facekit/error.hpp"
#include "facekit/evaluation.hpp"
#include "facekit/features.hpp"
#include "facekit/image.hpp"
#include "facekit/io.hpp"
#include "facekit/multiclass.hpp"
#include "facekit/pgm.hpp"
#include "facekit/recognizers.hpp"
#include "facekit/report.hpp"
#include "facekit/rng.hpp"
#include "facekit/segmentation.hpp"
#include "facekit/som.hpp"
#include "facekit/subspace.hpp"
#include "facekit/svm.hpp"
#include "facekit/synthetic.hpp"
