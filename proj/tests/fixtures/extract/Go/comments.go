// import "hidden"
import (
	"os" // comment
	// "commented"
)
import . "strings"
