#ifndef MICROFARM_LINK_HPP
#define MICROFARM_LINK_HPP

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace microfarm {

// Bidirectional line transport. Lines exclude the '\n' terminator.
class LineLink {
 public:
  virtual ~LineLink() = default;

  // Returns false once the link is closed.
  virtual bool send(std::string_view line) = 0;
  // Non-blocking.
  virtual std::optional<std::string> try_receive() = 0;
  // Blocks up to `timeout` for a line.
  virtual std::optional<std::string> receive_for(std::chrono::milliseconds timeout) = 0;
  virtual bool is_open() const = 0;
  virtual void close() = 0;
};

namespace detail {
struct MemoryChannel;
}

// One end of an in-process link; the other end is created alongside it.
class MemoryLink final : public LineLink {
 public:
  MemoryLink(std::shared_ptr<detail::MemoryChannel> in, std::shared_ptr<detail::MemoryChannel> out);
  ~MemoryLink() override;

  bool send(std::string_view line) override;
  std::optional<std::string> try_receive() override;
  std::optional<std::string> receive_for(std::chrono::milliseconds timeout) override;
  bool is_open() const override;
  void close() override;

 private:
  std::shared_ptr<detail::MemoryChannel> in_;
  std::shared_ptr<detail::MemoryChannel> out_;
};

// Returns {a, b}: lines sent on a arrive at b and vice versa. Closing either
// end closes both directions.
std::pair<std::unique_ptr<MemoryLink>, std::unique_ptr<MemoryLink>> make_memory_link();

}  // namespace microfarm

#endif  // MICROFARM_LINK_HPP
