#include "rainfall/error.hpp"

namespace rainfall {

void throw_invalid(const std::string& what) { throw InvalidArgument(what); }
void throw_domain(const std::string& what) { throw DomainError(what); }
void throw_numeric(const std::string& what) { throw NumericError(what); }

}  // namespace rainfall
