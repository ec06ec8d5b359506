#include "radmark/infer/model_backend.hpp"

#include "radmark/error.hpp"

#ifdef RADMARK_HAVE_OPENCV_DNN
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#endif

#include <cmath>

namespace radmark {

#ifdef RADMARK_HAVE_OPENCV_DNN

namespace {

class ModelBackend final : public InferenceBackend {
  public:
    ModelBackend(BackendDescriptor d, std::filesystem::path det_path, std::filesystem::path seg_path)
        : descriptor_(std::move(d)), det_path_(std::move(det_path)), seg_path_(std::move(seg_path)) {
        // cv::dnn::Net keeps per-forward state.
        descriptor_.thread_safe = false;
        if (provides(Capability::detect)) detector_ = read(det_path_);
        if (provides(Capability::segment)) segmenter_ = read(seg_path_);
        probe();
    }

    const BackendDescriptor& descriptor() const override { return descriptor_; }

    std::vector<Detection> detect(const NormalizedImage& image) override {
        detector_.setInput(blob(image), "image");
        const cv::Mat out = detector_.forward();
        return decode_detections(out, det_path_);
    }

    SegmentResult segment(const NormalizedImage& image, const BBox& prompt, ClassId class_id) override {
        segmenter_.setInput(blob(image), "image");
        cv::Mat box = (cv::Mat_<float>(1, 4) << static_cast<float>(prompt.x_min()), static_cast<float>(prompt.y_min()),
                       static_cast<float>(prompt.x_max()), static_cast<float>(prompt.y_max()));
        segmenter_.setInput(box, "box");
        const cv::Mat out = segmenter_.forward();
        const int s = descriptor_.required_input_side;
        check_mask_shape(out, seg_path_);
        SegmentResult r{class_id, s, s, {}, prompt, false, {}};
        const auto* p = out.ptr<float>();
        r.prob.assign(p, p + static_cast<std::size_t>(s) * s);
        return r;
    }

  private:
    bool provides(Capability c) const {
        return descriptor_.provides == Capability::both || descriptor_.provides == c;
    }

    static cv::dnn::Net read(const std::filesystem::path& path) {
        if (path.empty() || !std::filesystem::is_regular_file(path)) {
            throw BackendError("model file not found: " + path.string());
        }
        try {
            auto net = cv::dnn::readNetFromONNX(path.string());
            net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
            net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
            return net;
        } catch (const cv::Exception& e) {
            throw BackendError(path.string() + ": cannot load model: " + e.what());
        }
    }

    cv::Mat blob(const NormalizedImage& image) const {
        const int s = descriptor_.required_input_side;
        const int dims[] = {1, 1, s, s};
        cv::Mat m(4, dims, CV_32F);
        auto* out = m.ptr<float>();
        for (std::size_t i = 0; i < image.intensities.size(); ++i) out[i] = image.intensities[i] / 255.0f;
        return m;
    }

    std::vector<Detection> decode_detections(const cv::Mat& out, const std::filesystem::path& path) const {
        if (out.dims != 3 || out.size[0] != 1 || out.size[2] != 6 || out.type() != CV_32F) {
            throw BackendError(path.string() + ": detector output must be float [1, N, 6]");
        }
        std::vector<Detection> dets;
        const auto* row = out.ptr<float>();
        for (int i = 0; i < out.size[1]; ++i, row += 6) {
            if (row[4] == 0.0f) continue;
            const double cls = row[5];
            if (!std::isfinite(cls) || cls < 0.0 || std::abs(cls - std::round(cls)) > 1e-3) {
                throw BackendError(path.string() + ": detection row " + std::to_string(i) + " has class " +
                                   std::to_string(cls));
            }
            try {
                dets.push_back({class_id(static_cast<int>(std::lround(cls))),
                                BBox(row[0], row[1], row[2], row[3], Frame::model), row[4]});
            } catch (const ContractViolation& e) {
                throw BackendError(path.string() + ": detection row " + std::to_string(i) + ": " + e.what());
            }
        }
        return dets;
    }

    void check_mask_shape(const cv::Mat& out, const std::filesystem::path& path) const {
        const int s = descriptor_.required_input_side;
        if (out.dims != 4 || out.size[0] != 1 || out.size[1] != 1 || out.size[2] != s || out.size[3] != s ||
            out.type() != CV_32F) {
            throw BackendError(path.string() + ": segmenter output must be float [1, 1, " + std::to_string(s) + ", " +
                               std::to_string(s) + "]");
        }
    }

    void probe() {
        NormalizedImage zero;
        zero.width = zero.height = descriptor_.required_input_side;
        zero.intensities.assign(static_cast<std::size_t>(zero.width) * zero.height, 0);
        const auto side = std::to_string(descriptor_.required_input_side);
        if (provides(Capability::detect)) {
            try {
                detector_.setInput(blob(zero), "image");
                decode_detections(detector_.forward(), det_path_);
            } catch (const cv::Exception& e) {
                throw BackendError(det_path_.string() + ": model does not accept " + side + "x" + side +
                                   " input: " + e.what());
            }
        }
        if (provides(Capability::segment)) {
            try {
                segmenter_.setInput(blob(zero), "image");
                cv::Mat box = (cv::Mat_<float>(1, 4) << 0.f, 0.f, 1.f, 1.f);
                segmenter_.setInput(box, "box");
                check_mask_shape(segmenter_.forward(), seg_path_);
            } catch (const cv::Exception& e) {
                throw BackendError(seg_path_.string() + ": model does not accept " + side + "x" + side +
                                   " input: " + e.what());
            }
        }
    }

    BackendDescriptor descriptor_;
    std::filesystem::path det_path_;
    std::filesystem::path seg_path_;
    cv::dnn::Net detector_;
    cv::dnn::Net segmenter_;
};

} // namespace

bool model_backend_available() { return true; }

std::unique_ptr<InferenceBackend> load_model_backend(const std::filesystem::path& detector_path,
                                                     const std::filesystem::path& segmenter_path,
                                                     BackendDescriptor descriptor) {
    if (descriptor.required_input_side <= 0) {
        throw BackendError("model descriptor: input side must be positive");
    }
    if (descriptor.name.empty()) descriptor.name = "model";
    return std::make_unique<ModelBackend>(std::move(descriptor), detector_path, segmenter_path);
}

#else

bool model_backend_available() { return false; }

std::unique_ptr<InferenceBackend> load_model_backend(const std::filesystem::path&, const std::filesystem::path&,
                                                     BackendDescriptor) {
    throw BackendError("this build has no exported-model support (configure with RADMARK_WITH_ONNX=ON)");
}

#endif

} // namespace radmark
