package cache

import (
	"github.com/go-redis/redis/v8"
	"gopkg.in/yaml.v2"
)
