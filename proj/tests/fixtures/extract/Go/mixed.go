import "errors"
import (
	"io"
)
func main() { s := "import \"fake\"" }
